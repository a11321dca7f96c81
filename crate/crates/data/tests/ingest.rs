use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use num_bigint::BigInt;
use stpair_core::arith::straighten;
use stpair_core::montecarlo::ks_uniform;
use stpair_data::lmfdb::parse_newform;
use stpair_data::{angles_from_series, delta_series, CacheDir, CacheStatus, Error, LmfdbClient, RemoteFormRef};

/// Coefficients of η(z)²η(11z)², the newform 11.2.a.a.
fn x0_11(nmax: usize) -> Vec<i64> {
    let mut s = vec![0i64; nmax + 1];
    s[1] = 1;
    for (d, e) in [(1usize, 2), (11, 2)] {
        for _ in 0..e {
            for m in (1..).map(|j| j * d).take_while(|&m| m <= nmax) {
                for i in (m..=nmax).rev() {
                    s[i] -= s[i - m];
                }
            }
        }
    }
    s
}

fn response(label: &str, level: u64, weight: u32, traces: &[String]) -> String {
    format!(
        r#"{{"data":[{{"label":"{label}","level":{level},"weight":{weight},"dim":1,"char_orbit_index":1,"traces":[{}]}}],"next":null}}"#,
        traces.join(",")
    )
}

/// Serves canned bodies keyed by a substring of the request line; counts requests.
fn mock_server(routes: Vec<(String, String)>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let (status, body) = routes
                .iter()
                .find(|(k, _)| request_line.contains(k.as_str()))
                .map_or(("404 Not Found", String::new()), |(_, b)| ("200 OK", b.clone()));
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (format!("http://{addr}/api"), hits)
}

fn routes() -> Vec<(String, String)> {
    let e = x0_11(120);
    let delta = delta_series(120);
    vec![
        (
            "label=11.2.a.a&".into(),
            response(
                "11.2.a.a",
                11,
                2,
                &e[1..].iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            ),
        ),
        (
            "label=1.12.a.a&".into(),
            response(
                "1.12.a.a",
                1,
                12,
                &delta.coeffs().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            ),
        ),
        (
            "label=3.4.a.a&".into(),
            r#"{"data":[{"label":"3.4.a.a","level":3}]}"#.into(),
        ),
    ]
}

#[test]
fn fetch_then_replay_from_cache() {
    let (url, hits) = mock_server(routes());
    let dir = tempfile::tempdir().unwrap();
    let client = LmfdbClient::new(url, CacheDir::new(dir.path()));
    let r = RemoteFormRef::parse("11.2.1", 100).unwrap();
    let first = client.fetch(&r).unwrap();
    assert!(!first.from_cache);
    assert_eq!(first.series.a(2), Some(&BigInt::from(-2)));
    assert_eq!(stpair_trace::trace_tn_new(11, 2, 2).unwrap(), BigInt::from(-2));
    let raw = std::fs::read(&first.cache_path).unwrap();
    let second = client.fetch(&r).unwrap();
    assert!(second.from_cache);
    assert_eq!(second.series, first.series);
    assert_eq!(std::fs::read(&first.cache_path).unwrap(), raw);
    assert_eq!((client.network_calls(), hits.load(Ordering::SeqCst)), (1, 1));
}

#[test]
fn level_one_weight_twelve_matches_delta() {
    let (url, _) = mock_server(routes());
    let dir = tempfile::tempdir().unwrap();
    let client = LmfdbClient::new(url, CacheDir::new(dir.path()));
    let s = client
        .fetch(&RemoteFormRef::parse("1.12.a.a", 100).unwrap())
        .unwrap()
        .series;
    assert_eq!(s.coeffs(), delta_series(100).coeffs());
}

#[test]
fn corrupt_entry_is_refetched() {
    let (url, hits) = mock_server(routes());
    let dir = tempfile::tempdir().unwrap();
    let cache = CacheDir::new(dir.path());
    let client = LmfdbClient::new(url, cache.clone());
    let r = RemoteFormRef::parse("11.2.1", 50).unwrap();
    let path = client.fetch(&r).unwrap().cache_path;
    let text = std::fs::read_to_string(&path).unwrap().replacen("-2", "-3", 1);
    std::fs::write(&path, text).unwrap();
    let again = client.fetch(&r).unwrap();
    assert!(!again.from_cache);
    assert_eq!(again.series.a(2), Some(&BigInt::from(-2)));
    assert_eq!(hits.load(Ordering::SeqCst), 2);
    assert!(path.with_extension("json.corrupt").exists());
    assert!(matches!(
        cache.load("lmfdb", &r.cache_key()).unwrap(),
        CacheStatus::Hit(_)
    ));
}

#[test]
fn schema_mismatch_names_field() {
    let (url, _) = mock_server(routes());
    let dir = tempfile::tempdir().unwrap();
    let client = LmfdbClient::new(url, CacheDir::new(dir.path()));
    let err = client.fetch(&RemoteFormRef::parse("3.4.1", 10).unwrap()).unwrap_err();
    assert!(
        matches!(err, Error::Schema { ref field, .. } if field == "weight"),
        "{err}"
    );
}

#[test]
fn unreachable_server_without_cache_fails() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let client = LmfdbClient::new(format!("http://127.0.0.1:{port}/api"), CacheDir::new(dir.path()));
    let err = client.fetch(&RemoteFormRef::parse("11.2.1", 10).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Fetch { .. }), "{err}");
}

#[test]
fn warm_cache_needs_no_server() {
    let dir = tempfile::tempdir().unwrap();
    let cache = CacheDir::new(dir.path());
    let r = RemoteFormRef::parse("11.2.1", 20).unwrap();
    let e = x0_11(20);
    let body = response(
        "11.2.a.a",
        11,
        2,
        &e[1..].iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    );
    parse_newform(&body, &r).unwrap();
    cache.store("lmfdb", &r.cache_key(), &body).unwrap();
    let client = LmfdbClient::new("http://127.0.0.1:9/api", cache);
    let f = client.fetch(&r).unwrap();
    assert!(f.from_cache);
    assert_eq!(client.network_calls(), 0);
}

#[test]
fn concurrent_readers_never_see_partial_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cache = CacheDir::new(dir.path());
    let a = "a".repeat(200_000);
    let b = "b".repeat(300_000);
    cache.store("stress", "entry", &a).unwrap();
    let writer = {
        let (cache, a, b) = (cache.clone(), a.clone(), b.clone());
        thread::spawn(move || {
            for i in 0..60 {
                cache
                    .store("stress", "entry", if i % 2 == 0 { &b } else { &a })
                    .unwrap();
            }
        })
    };
    let readers: Vec<_> = (0..3)
        .map(|_| {
            let (cache, a, b) = (cache.clone(), a.clone(), b.clone());
            thread::spawn(move || {
                for _ in 0..60 {
                    match cache.load("stress", "entry").unwrap() {
                        CacheStatus::Hit(p) => assert!(p == a || p == b),
                        other => panic!("reader saw {other:?}"),
                    }
                }
            })
        })
        .collect();
    writer.join().unwrap();
    for r in readers {
        r.join().unwrap();
    }
}

#[test]
fn delta_angles_are_sato_tate() {
    let d = delta_series(100_000);
    let set = angles_from_series(&d, 100_000).unwrap();
    assert_eq!(set.len(), 9592);
    let h: Vec<f64> = set.angles().iter().map(|&a| straighten(a)).collect();
    let ks = ks_uniform(&h);
    assert!(ks < 1.628 / (h.len() as f64).sqrt(), "KS statistic {ks}");
    assert!(set.angles().iter().all(|a| (0.0..=1.0).contains(&a.value())));
}

#[test]
fn delta_agrees_with_trace_engine() {
    let d = delta_series(50);
    for n in 1..=50 {
        assert_eq!(d.a(n).unwrap(), &stpair_trace::trace_tn_full(1, 12, n).unwrap());
    }
}
