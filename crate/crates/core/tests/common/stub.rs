//! Minimal HTTP/1.1 server speaking the probability protocol.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

pub type Handler = dyn Fn(&str, &str, &str) -> (u16, String) + Send + Sync;

pub struct Stub {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

pub fn serve(handler: Box<Handler>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let handler: Arc<Handler> = handler.into();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let handler = handler.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    return;
                }
                let mut parts = request_line.split_whitespace();
                let method = parts.next().unwrap_or("").to_string();
                let path = parts.next().unwrap_or("").to_string();
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0u8; len];
                reader.read_exact(&mut body).unwrap();
                let (status, out) = handler(&method, &path, &String::from_utf8(body).unwrap());
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
                    out.len()
                );
                let _ = stream.write_all(resp.as_bytes());
            });
        }
    });
    Stub { url, hits }
}

/// Well-behaved server: `yes = len(input) mod 7 + 1`, `no = 1`, health
/// reports a checkpoint and answer-token policy.
pub fn conforming() -> Stub {
    serve(Box::new(|method, path, body| match (method, path) {
        ("GET", "/health") => (200, r#"{"checkpoint":"stub-ckpt","policy":"first_token"}"#.into()),
        ("POST", "/probabilities") => {
            let v: serde_json::Value = serde_json::from_str(body).unwrap();
            let pairs: Vec<serde_json::Value> = v["inputs"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| serde_json::json!({"yes": (s.as_str().unwrap().len() % 7 + 1) as f64, "no": 1.0}))
                .collect();
            (200, serde_json::json!({ "pairs": pairs }).to_string())
        }
        _ => (404, "{}".into()),
    }))
}
