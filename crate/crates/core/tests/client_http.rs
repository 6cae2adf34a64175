//! Instruction client against a local mock chat-completions endpoint.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use serde_json::{json, Value};
use wtw_core::client::{default_exemplars, ClientConfig, ClientError, ConverterMode, InstructionClient, SYSTEM_PROMPT};
use wtw_core::route::{Maneuver, ManeuverSequence};

struct Captured {
    request_line: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves one canned `(status, body)` per connection, in order, and reports each request.
fn mock_server(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, reply) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let (mut len, mut authorization) = (0usize, None);
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => len = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body).unwrap();
            tx.send(Captured {
                request_line: request_line.trim_end().to_string(),
                authorization,
                body: serde_json::from_slice(&body).unwrap(),
            })
            .unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1"), rx)
}

fn completion(content: &str) -> String {
    json!({ "choices": [{ "index": 0, "message": { "role": "assistant", "content": content } }] }).to_string()
}

fn remote(base_url: String, key_env: &str) -> ClientConfig {
    ClientConfig {
        mode: ConverterMode::Remote,
        base_url,
        model: "test-model".into(),
        timeout_ms: 5_000,
        fixture_path: None,
        api_key_env: key_env.into(),
    }
}

const URD: &str = "Walk to the trashcan and take a left. The box is where you stop.";
const CRD: &str = "Go straight to a trashcan, then turn left. Go straight to a box, then stop.";

#[test]
fn request_wire_format_and_parsed_reply() {
    std::env::set_var("WTW_TEST_KEY_WIRE", "sk-wire");
    let (url, rx) = mock_server(vec![(200, completion(CRD))]);
    let mut client = InstructionClient::new(remote(url, "WTW_TEST_KEY_WIRE")).unwrap();
    let result = client.convert(URD).unwrap();
    assert_eq!(result.crd_text(), CRD);
    assert_eq!(
        ManeuverSequence::from_crd(result.crd()).maneuvers(),
        [Maneuver::Straight, Maneuver::Left, Maneuver::Straight, Maneuver::Stop]
    );

    let req = rx.recv().unwrap();
    assert_eq!(req.request_line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(req.authorization.as_deref(), Some("Bearer sk-wire"));
    assert_eq!(req.body["model"], "test-model");
    let messages = req.body["messages"].as_array().unwrap();
    let exemplars = default_exemplars();
    assert_eq!(messages.len(), 2 + 2 * exemplars.len());
    assert_eq!(messages[0], json!({ "role": "system", "content": SYSTEM_PROMPT }));
    for (i, (urd, crd)) in exemplars.iter().enumerate() {
        assert_eq!(messages[1 + 2 * i], json!({ "role": "user", "content": urd }));
        assert_eq!(messages[2 + 2 * i], json!({ "role": "assistant", "content": crd }));
    }
    assert_eq!(messages.last().unwrap(), &json!({ "role": "user", "content": URD }));
}

#[test]
fn invalid_reply_is_reprompted_once() {
    std::env::set_var("WTW_TEST_KEY_REPROMPT", "sk");
    let bad = "Sorry, I am not sure.";
    let (url, rx) = mock_server(vec![(200, completion(bad)), (200, completion(CRD))]);
    let mut client = InstructionClient::new(remote(url, "WTW_TEST_KEY_REPROMPT")).unwrap();
    assert_eq!(client.convert(URD).unwrap().crd_text(), CRD);

    let first = rx.recv().unwrap().body["messages"].as_array().unwrap().clone();
    let second = rx.recv().unwrap().body["messages"].as_array().unwrap().clone();
    assert_eq!(second.len(), first.len() + 2);
    assert_eq!(second[..first.len()], first[..]);
    assert_eq!(second[first.len()], json!({ "role": "assistant", "content": bad }));
    assert_eq!(second[first.len() + 1]["role"], "user");
}

#[test]
fn two_invalid_replies_surface_raw_payload() {
    std::env::set_var("WTW_TEST_KEY_INVALID", "sk");
    let (url, _rx) = mock_server(vec![(200, completion("nope")), (200, completion("still nope"))]);
    let mut client = InstructionClient::new(remote(url, "WTW_TEST_KEY_INVALID")).unwrap();
    let err = client.convert(URD).unwrap_err();
    assert!(matches!(err, ClientError::InvalidCrdReturned { .. }), "{err:?}");
    assert!(err.raw_payload().unwrap().contains("still nope"));
}

#[test]
fn rejected_key_is_auth_failure() {
    std::env::set_var("WTW_TEST_KEY_AUTH", "sk-bad");
    let body = r#"{"error":{"message":"invalid api key"}}"#.to_string();
    let (url, _rx) = mock_server(vec![(401, body.clone())]);
    let mut client = InstructionClient::new(remote(url, "WTW_TEST_KEY_AUTH")).unwrap();
    match client.convert(URD).unwrap_err() {
        ClientError::AuthFailure { status, raw } => {
            assert_eq!(status, 401);
            assert_eq!(raw, body);
        }
        other => panic!("expected auth failure, got {other:?}"),
    }
}

#[test]
fn reply_without_content_is_malformed() {
    std::env::set_var("WTW_TEST_KEY_MALFORMED", "sk");
    let (url, _rx) = mock_server(vec![(200, r#"{"choices":[]}"#.to_string())]);
    let mut client = InstructionClient::new(remote(url, "WTW_TEST_KEY_MALFORMED")).unwrap();
    let err = client.convert(URD).unwrap_err();
    assert!(matches!(err, ClientError::MalformedResponse { .. }), "{err:?}");
}

#[test]
fn missing_credential() {
    let mut client =
        InstructionClient::new(remote("http://127.0.0.1:1/v1".into(), "WTW_TEST_KEY_NEVER_SET")).unwrap();
    let err = client.convert(URD).unwrap_err();
    assert!(matches!(err, ClientError::MissingCredential(ref v) if v == "WTW_TEST_KEY_NEVER_SET"));
}

#[test]
fn unreachable_endpoint() {
    std::env::set_var("WTW_TEST_KEY_UNREACHABLE", "sk");
    let mut client =
        InstructionClient::new(remote("http://127.0.0.1:1/v1".into(), "WTW_TEST_KEY_UNREACHABLE")).unwrap();
    let err = client.convert(URD).unwrap_err();
    assert!(matches!(err, ClientError::ServiceUnreachable { .. }), "{err:?}");
}

#[test]
fn recorded_session_replays_identically() {
    std::env::set_var("WTW_TEST_KEY_RECORD", "sk");
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("session.json");
    let (url, _rx) = mock_server(vec![(200, completion(CRD))]);
    let live = InstructionClient::new(ClientConfig {
        fixture_path: Some(fixture.clone()),
        ..remote(url, "WTW_TEST_KEY_RECORD")
    })
    .unwrap()
    .convert(URD)
    .unwrap();

    let replay_config = ClientConfig {
        mode: ConverterMode::Replay,
        fixture_path: Some(fixture),
        ..remote("http://127.0.0.1:1/v1".into(), "WTW_TEST_KEY_RECORD")
    };
    let a = InstructionClient::new(replay_config.clone()).unwrap().convert(URD).unwrap();
    let b = InstructionClient::new(replay_config.clone()).unwrap().convert(URD).unwrap();
    assert_eq!(a.crd_text(), live.crd_text());
    assert_eq!(a.raw_response(), live.raw_response());
    assert_eq!((a.crd_text(), a.raw_response(), a.latency_ms()), (b.crd_text(), b.raw_response(), 0));

    let miss = InstructionClient::new(replay_config).unwrap().convert("Find a white ball, and stop.");
    assert!(matches!(miss, Err(ClientError::ReplayMiss { .. })));
}
