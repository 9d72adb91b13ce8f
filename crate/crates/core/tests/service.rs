use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread;

use inkstroke::ink::{strokes_to_json, InkSample, UNLABELED};
use inkstroke::pipeline::PipelineConfig;
use inkstroke::recognizer::{Recognition, Recognizer};
use inkstroke::service::{handle, Service, ServiceState};
use inkstroke::synthgen::{default_templates, generate};
use serde_json::{json, Value};

struct Reply {
    status: u16,
    headers: String,
    body: Vec<u8>,
}

fn request(addr: SocketAddr, method: &str, path: &str, origin: Option<&str>, body: &[u8]) -> Reply {
    let mut stream = TcpStream::connect(addr).unwrap();
    let origin = origin.map(|o| format!("Origin: {o}\r\n")).unwrap_or_default();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\n{origin}Content-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )
    .unwrap();
    stream.write_all(body).unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
    let headers = String::from_utf8(raw[..split].to_vec()).unwrap();
    let status = headers.split(' ').nth(1).unwrap().parse().unwrap();
    Reply {
        status,
        headers,
        body: raw[split + 4..].to_vec(),
    }
}

fn start(state: ServiceState) -> (SocketAddr, inkstroke::service::StopHandle, thread::JoinHandle<()>) {
    let service = Service::bind(state, "127.0.0.1:0").unwrap();
    let addr = service.local_addr();
    let stop = service.stop_handle(2);
    let join = thread::spawn(move || service.run(2));
    (addr, stop, join)
}

fn trained() -> (Recognizer, Vec<InkSample>) {
    let samples = generate(&default_templates(), 10, 0.02, 21);
    let mut config = PipelineConfig::default();
    config.train.seed = 4;
    config.train.max_epochs = 100;
    (Recognizer::train_samples(&samples, &config).unwrap(), samples)
}

fn body_for(sample: &InkSample) -> Vec<u8> {
    serde_json::to_vec(&json!({ "strokes": strokes_to_json(sample.strokes()) })).unwrap()
}

#[test]
fn health_is_503_without_a_model() {
    let (addr, stop, join) = start(ServiceState::empty());
    assert_eq!(request(addr, "GET", "/api/health", None, b"").status, 503);
    assert_eq!(request(addr, "GET", "/api/model", None, b"").status, 503);
    stop.stop();
    join.join().unwrap();
}

#[test]
fn recognize_over_http() {
    let (recognizer, samples) = trained();
    let manifest = recognizer.manifest();
    let state = ServiceState::with_recognizer(recognizer.clone());
    let (addr, stop, join) = start(state.clone());

    let health = request(addr, "GET", "/api/health", None, b"");
    assert_eq!(health.status, 200);
    let served: Value = serde_json::from_slice(&request(addr, "GET", "/api/model", None, b"").body).unwrap();
    assert_eq!(served, serde_json::to_value(&manifest).unwrap());
    assert_eq!(served["clusters"].as_array().unwrap().len(), 4);

    // An alef sample routes to cluster 1 and keeps its label.
    let alef = samples.iter().find(|s| s.label == "ا").unwrap();
    let r = request(addr, "POST", "/api/recognize", Some("http://localhost:5173"), &body_for(alef));
    assert_eq!(r.status, 200);
    assert!(r.headers.contains("Access-Control-Allow-Origin: http://localhost:5173"));
    let rec: Recognition = serde_json::from_slice(&r.body).unwrap();
    assert_eq!(rec.label, "ا");
    assert_eq!(rec.cluster_id, 1);
    assert!(rec.scores.iter().all(|s| s.score > 0.0 && s.score < 1.0));
    for st in &rec.strokes {
        let mut next = 0;
        for t in &st.tokens {
            assert_eq!(t.start_index, next);
            next = t.end_index + 1;
        }
    }

    // Same path as the library (and so the CLI): identical bytes, and
    // identical requests give identical responses.
    let live = InkSample::new(UNLABELED, alef.strokes().to_vec()).unwrap();
    let direct = serde_json::to_vec(&recognizer.recognize(&live).unwrap()).unwrap();
    assert_eq!(r.body, direct);
    let again = request(addr, "POST", "/api/recognize", None, &body_for(alef));
    assert_eq!(again.body, r.body);
    assert!(!again.headers.contains("Access-Control-Allow-Origin"));

    let two = samples.iter().find(|s| s.stroke_count() == 2).unwrap();
    let rec: Recognition =
        serde_json::from_slice(&request(addr, "POST", "/api/recognize", None, &body_for(two)).body).unwrap();
    assert_eq!(rec.cluster_id, 2);

    assert_eq!(request(addr, "POST", "/api/recognize", None, b"not json").status, 400);
    assert_eq!(request(addr, "POST", "/api/recognize", None, br#"{"strokes":[]}"#).status, 422);
    assert_eq!(
        request(addr, "GET", "/api/health", Some("http://evil.example"), b"").headers.contains("Access-Control"),
        false
    );

    // Concurrent identical requests agree.
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let body = body_for(alef);
            thread::spawn(move || request(addr, "POST", "/api/recognize", None, &body).body)
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), direct);
    }
    stop.stop();
    join.join().unwrap();
}

#[test]
fn echo_round_trip_is_exact() {
    let (addr, stop, join) = start(ServiceState::empty());
    // Screen coordinates flipped to y-up before sending, as the pad does.
    let height = 480.0;
    let screen = [(12.5, 400.25, 0.0), (13.0, 399.0, 16.0), (40.125, 310.5, 33.0)];
    let sent: Vec<Vec<f64>> = screen.iter().map(|&(x, y, t)| vec![x, height - y, t]).collect();
    let r = request(
        addr,
        "POST",
        "/api/echo",
        None,
        &serde_json::to_vec(&json!({ "strokes": [sent.clone()] })).unwrap(),
    );
    assert_eq!(r.status, 200);
    let v: Value = serde_json::from_slice(&r.body).unwrap();
    assert_eq!(v["strokes"], json!([sent]));
    stop.stop();
    join.join().unwrap();
}

#[test]
fn handler_matches_socket_path() {
    let (recognizer, samples) = trained();
    let state = ServiceState::with_recognizer(recognizer);
    let body = body_for(&samples[0]);
    let direct = handle(&state, "POST", "/api/recognize", &body);
    let (addr, stop, join) = start(state);
    let r = request(addr, "POST", "/api/recognize", None, &body);
    assert_eq!((r.status, r.body), (direct.status, direct.body));
    stop.stop();
    join.join().unwrap();
}
