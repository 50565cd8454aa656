#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_terragen"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("GENTE_API_URL").env_remove("GENTE_API_KEY").env_remove("GENTE_MODEL").output().unwrap()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

pub struct Mock {
    pub url: String,
    pub seen: Arc<Mutex<Vec<Value>>>,
    pub handle: thread::JoinHandle<()>,
}

/// Local chat-completions endpoint that replays `script` in order.
pub fn serve(script: Vec<Value>) -> Mock {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", server.server_addr().to_ip().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = thread::spawn(move || {
        for body in script {
            let Ok(Some(mut req)) = server.recv_timeout(Duration::from_secs(20)) else { return };
            let mut text = String::new();
            req.as_reader().read_to_string(&mut text).unwrap();
            log.lock().unwrap().push(serde_json::from_str(&text).unwrap_or(Value::Null));
            let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
            req.respond(tiny_http::Response::from_string(body.to_string()).with_header(header)).unwrap();
        }
    });
    Mock { url, seen, handle }
}

pub fn reply(calls: Value) -> Value {
    json!({ "choices": [{ "index": 0, "message": { "role": "assistant", "content": null, "tool_calls": calls } }] })
}

pub fn call(name: &str, args: Value) -> Value {
    json!({ "id": "c", "type": "function", "function": { "name": name, "arguments": args.to_string() } })
}

pub fn valid_reply() -> Value {
    reply(json!([
        call("flat", json!({ "elevation": 0.0 })),
        call("rocks", json!({ "density": 0.3, "target": { "row": 0, "col": 0 } })),
        call("wading", json!({ "water_level": 0.2 })),
        call("deformable", json!({ "target": { "row": 0, "col": 0 } }))
    ]))
}

pub fn invalid_reply() -> Value {
    reply(json!([call("stairs", json!({ "step_depth": 0.3, "count": 5 }))]))
}
