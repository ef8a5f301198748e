use serde_json::{json, Value};

fn id_param() -> Value {
    json!({"name": "id", "in": "path", "required": true, "schema": {"type": "string"}})
}

fn errors() -> Value {
    json!({
        "404": {"description": "unknown problem id"},
        "409": {"description": "stale revision"},
        "422": {"description": "schema, input or infeasibility error with diagnostics"},
    })
}

fn op(summary: &str, params: Value, body: Option<&str>) -> Value {
    let mut o = json!({
        "summary": summary,
        "parameters": params,
        "responses": {"200": {"description": "ok"}},
    });
    if let Some(b) = body {
        o["requestBody"] = json!({"required": true, "content": {"application/json": {"schema": {"$ref": format!("#/components/schemas/{b}")}}}});
    }
    for (k, v) in errors().as_object().expect("object") {
        o["responses"][k] = v.clone();
    }
    o
}

pub fn document() -> Value {
    let id = id_param();
    json!({
        "openapi": "3.0.3",
        "info": {"title": "argwf scheduling service", "version": env!("CARGO_PKG_VERSION")},
        "paths": {
            "/problems": {"post": op("Create a problem; its schedule starts empty", json!([]), Some("Problem"))},
            "/problems/{id}": {"get": op("Problem, schedule and revision", json!([id]), None)},
            "/problems/{id}/schedule": {"put": op(
                "Replace the schedule",
                json!([id, {"name": "revision", "in": "query", "required": false, "schema": {"type": "integer"}}]),
                Some("Schedule"),
            )},
            "/problems/{id}/validate": {"post": op("Explanations for the current schedule", json!([id]), None)},
            "/problems/{id}/optimize": {"post": op(
                "Optimized schedule and move trace; the stored schedule is not changed",
                json!([id, {"name": "mode", "in": "query", "required": false, "schema": {"type": "string", "enum": ["local", "exact"]}}]),
                None,
            )},
            "/problems/{id}/moves": {"post": op("Apply a move at a given revision", json!([id]), Some("MoveRequest"))},
            "/problems/{id}/af/{kind}": {"get": op(
                "Argumentation framework as JSON or DOT",
                json!([
                    id,
                    {"name": "kind", "in": "path", "required": true, "schema": {"type": "string", "enum": ["feasibility", "efficiency", "individual", "skills", "instrument", "job-instrument"]}},
                    {"name": "format", "in": "query", "required": false, "schema": {"type": "string", "enum": ["json", "dot"]}},
                ]),
                None,
            )},
            "/problems/{id}/cost": {"get": op("Per-operator costs and makespan", json!([id]), None)},
        },
        "components": {"schemas": {
            "Problem": {
                "type": "object",
                "required": ["operators", "jobs", "processing"],
                "properties": {
                    "alpha": {"type": "number"},
                    "beta": {"type": "number"},
                    "depot": {"type": "array", "items": {"type": "number"}},
                    "skills": {"type": "array", "items": {"type": "string"}},
                    "operators": {"type": "array", "items": {"type": "object"}},
                    "instruments": {"type": "array", "items": {"type": "object"}},
                    "jobs": {"type": "array", "items": {"type": "object"}},
                    "processing": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                },
            },
            "Schedule": {
                "type": "object",
                "properties": {
                    "routes": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
                    "instruments": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
                },
            },
            "MoveRequest": {
                "type": "object",
                "required": ["revision", "move"],
                "properties": {"revision": {"type": "integer"}, "move": {"type": "object"}},
            },
        }},
    })
}
