//! JSON encodings of values, actions, traces and heaps.
//!
//! Integers are JSON numbers when they fit in an `i64` and decimal strings
//! otherwise.

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value as Json};

use crate::sem::{Action, EventPar, Heap, ParAction};
use crate::value::Value;

pub fn value_json(v: &Value) -> Json {
    match v {
        Value::Int(n) => match n.to_i64() {
            Some(i) => json!({ "int": i }),
            None => json!({ "int": n.to_string() }),
        },
        Value::Bool(b) => json!({ "bool": b }),
        Value::Loc(l) => json!({ "loc": l }),
    }
}

pub fn action_json(a: &Action) -> Json {
    match a {
        Action::Tau => json!({ "k": "tau" }),
        Action::Call { name, args } => json!({
            "k": "call",
            "name": name,
            "args": args.iter().map(value_json).collect::<Vec<_>>(),
        }),
        Action::Return { name } => json!({ "k": "return", "name": name }),
        Action::Read { loc, off, val } => json!({
            "k": "read",
            "loc": loc,
            "off": off,
            "val": value_json(val),
        }),
        Action::Write { loc, off, val } => json!({
            "k": "write",
            "loc": loc,
            "off": off,
            "val": value_json(val),
        }),
    }
}

/// `{"tid":t,"act":{..}}` for a plain step, `{"tid":t,"atomic":[..]}` for
/// an atomic block.
pub fn event_json(e: &EventPar) -> Json {
    match &e.action {
        ParAction::Seq(a) => json!({ "tid": e.tid, "act": action_json(a) }),
        ParAction::Atomic(acts) => json!({
            "tid": e.tid,
            "atomic": acts.iter().map(action_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn seq_trace_json(trace: &[Action]) -> Json {
    Json::Array(trace.iter().map(action_json).collect())
}

pub fn par_trace_json(trace: &[EventPar]) -> Json {
    Json::Array(trace.iter().map(event_json).collect())
}

/// Location name to the list of its cells.
pub fn heap_json(h: &Heap) -> Json {
    let mut m = Map::new();
    for (loc, cells) in h.iter() {
        m.insert(loc.clone(), cells.iter().map(value_json).collect());
    }
    Json::Object(m)
}
