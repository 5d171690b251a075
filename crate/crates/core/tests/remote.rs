#![cfg(feature = "remote")]

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use cyclored::app::{ingest_degrees, IngestSource};

/// Serve the bundled fixtures over HTTP for a fixed number of requests.
fn serve(requests: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/lmfdb");
    thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut line = String::new();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            reader.read_line(&mut line).unwrap();
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header.trim().is_empty() {
                    break;
                }
            }
            let path = line.split_whitespace().nth(1).unwrap_or("/");
            let (status, body) = match fs::read(format!("{fixtures}{path}")) {
                Ok(body) => ("200 OK", body),
                Err(_) => ("404 Not Found", Vec::new()),
            };
            write!(stream, "HTTP/1.1 {status}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len()).unwrap();
            stream.write_all(&body).unwrap();
        }
    });
    format!("http://{addr}")
}

#[test]
fn online_and_offline_agree() {
    let endpoint = serve(5);
    let cache = tempfile::tempdir().unwrap();
    let online = IngestSource::Remote { endpoint, fixtures: cache.path().into() };
    let offline = IngestSource::Offline { fixtures: cache.path().into() };
    for i in 1..=5 {
        let label = format!("serre-ex{i}");
        let fetched = ingest_degrees(&online, &label).unwrap();
        assert!(cache.path().join(format!("{label}.json")).is_file());
        assert_eq!(ingest_degrees(&offline, &label).unwrap(), fetched);
    }
}
