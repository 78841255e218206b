//! Both HTTP clients against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use clinicsum_core::embed::{embed_batch, HttpEmbedder, HttpEmbedderConfig};
use clinicsum_core::infer::{generate_summary, ChatClient, ChatClientConfig};
use clinicsum_core::Error;

struct Request {
    line: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

/// Serves one scripted `(status, body)` per connection, then stops. Returns the
/// base URL and the requests seen.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Request>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let mut len = 0;
            let mut authorization = None;
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                let h = h.trim_end();
                if h.is_empty() {
                    break;
                }
                let (name, value) = h.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => len = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Request {
                line: line.trim_end().to_string(),
                authorization,
                body: serde_json::from_slice(&buf).unwrap(),
            });
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (base, seen)
}

fn chat_reply(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]})
        .to_string()
}

#[test]
fn chat_gives_up_after_three_server_errors() {
    let (base, seen) = serve(vec![(500, "{}".into()); 3]);
    let client = ChatClient::new(ChatClientConfig::new(base, "m")).unwrap();
    let err = generate_summary(&client, "prompt").unwrap_err();
    assert!(matches!(err, Error::Generation(_)), "{err:?}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn chat_recovers_from_transient_errors() {
    let (base, seen) = serve(vec![
        (503, "{}".into()),
        (429, "{}".into()),
        (200, chat_reply("Plan:\nrest")),
    ]);
    let mut cfg = ChatClientConfig::new(base, "model-x");
    cfg.api_key = Some("secret".into());
    cfg.max_tokens = 77;
    let client = ChatClient::new(cfg).unwrap();
    assert_eq!(generate_summary(&client, "hello").unwrap(), "Plan:\nrest");

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let last = &seen[2];
    assert_eq!(last.line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(last.authorization.as_deref(), Some("Bearer secret"));
    assert_eq!(
        last.body,
        serde_json::json!({
            "model": "model-x",
            "messages": [{"role": "user", "content": "hello"}],
            "temperature": 0.0,
            "max_tokens": 77
        })
    );
}

#[test]
fn chat_client_errors_are_not_retried() {
    let (base, seen) = serve(vec![(400, "{}".into()), (200, chat_reply("unused"))]);
    let client = ChatClient::new(ChatClientConfig::new(base, "m")).unwrap();
    assert!(matches!(
        generate_summary(&client, "p"),
        Err(Error::Generation(_))
    ));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn chat_empty_content_is_empty_response() {
    let (base, _) = serve(vec![(200, chat_reply(""))]);
    let client = ChatClient::new(ChatClientConfig::new(base, "m")).unwrap();
    assert!(matches!(
        generate_summary(&client, "p"),
        Err(Error::EmptyResponse)
    ));
}

#[test]
fn embeddings_are_reordered_and_normalized() {
    let body = serde_json::json!({
        "data": [
            {"index": 1, "embedding": [0.0, 2.0]},
            {"index": 0, "embedding": [3.0, 4.0]}
        ],
        "model": "e"
    })
    .to_string();
    let (base, seen) = serve(vec![(200, body)]);
    let emb = HttpEmbedder::new(HttpEmbedderConfig::new(format!("{base}/"), "e", 2)).unwrap();
    let v = embed_batch(&emb, &["first", "second"]).unwrap();
    assert_eq!(v[0].values(), [0.6, 0.8]);
    assert_eq!(v[1].values(), [0.0, 1.0]);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].line, "POST /v1/embeddings HTTP/1.1");
    assert_eq!(
        seen[0].body,
        serde_json::json!({"model": "e", "input": ["first", "second"]})
    );
}

#[test]
fn embedding_dimension_mismatch_is_reported() {
    let body =
        serde_json::json!({"data": [{"index": 0, "embedding": [1.0, 0.0, 0.0]}]}).to_string();
    let (base, _) = serve(vec![(200, body)]);
    let emb = HttpEmbedder::new(HttpEmbedderConfig::new(base, "e", 2)).unwrap();
    let err = embed_batch(&emb, &["x"]).unwrap_err();
    assert!(
        matches!(
            err,
            Error::Dimension {
                expected: 2,
                actual: 3
            }
        ),
        "{err:?}"
    );
}

#[test]
fn embedding_server_errors_exhaust_retries() {
    let (base, seen) = serve(vec![(502, "{}".into()); 3]);
    let emb = HttpEmbedder::new(HttpEmbedderConfig::new(base, "e", 2)).unwrap();
    assert!(matches!(embed_batch(&emb, &["x"]), Err(Error::Provider(_))));
    assert_eq!(seen.lock().unwrap().len(), 3);
}
