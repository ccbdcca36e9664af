use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use num_complex::Complex64;
use qrmap_core::render::{
    count_components, default_min_pixels, point_to_pixel, ColorMode, ParamRender, RasterImage, RED, SEGMENT_MARK,
    WHITE,
};
use qrmap_core::{Family, ParamWindow, Preset};
use qrmap_service::{router, AppState, ImageFormat, TileKey};
use serde_json::Value;
use tower::ServiceExt;

// V4A parameter classified TYPE2 by flood fill: the straight segment from the
// free critical point to its attractor crosses another basin.
const FLOOD_T: (f64, f64) = (0.675, -0.9375);
const FLOOD_VIEW: &str = "cx=0.4&cy=0.07&hw=0.25&size=200";

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).expect("json body")
    }

    fn image(&self) -> RasterImage {
        RasterImage::decode(&self.body).expect("image body")
    }

    fn header(&self, name: header::HeaderName) -> Option<&str> {
        self.headers.get(name).and_then(|v| v.to_str().ok())
    }
}

async fn send(app: &Router, uri: &str, headers: &[(header::HeaderName, &str)]) -> Reply {
    let mut req = Request::get(uri);
    for (k, v) in headers {
        req = req.header(k, *v);
    }
    let resp = app.clone().oneshot(req.body(Body::empty()).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    Reply { status, headers, body }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, uri, &[]).await
}

fn app() -> Router {
    router(AppState::default())
}

#[tokio::test]
async fn families_lists_the_five_parametrized_families() {
    let r = get(&app(), "/api/families").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    let list = v["families"].as_array().unwrap();
    assert_eq!(list.len(), 5);
    let v3 = list.iter().find(|f| f["tag"] == "v3").unwrap();
    assert_eq!(v3["default_window"]["center"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v3["default_window"]["half_width"], 4.0);
    assert!(v3["excluded"].as_str().unwrap().contains("c = 0"));
    assert!(list.iter().all(|f| f["tag"] != "v5"));
    assert_eq!(v["omitted"][0]["tag"], "v5");
    assert_eq!(v["omitted"][0]["reason"], "genus 1, no rational parametrization");
}

#[tokio::test]
async fn v3_type_tile_at_the_preset_window_has_two_red_components() {
    let app = app();
    let r = get(&app, "/api/tile?family=v3&mode=type&cx=0&cy=0&hw=4&size=256").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.header(header::CONTENT_TYPE), Some("image/x-portable-pixmap"));
    let img = r.image();
    assert_eq!((img.width, img.height), (256, 256));
    assert_eq!(count_components(&img, RED, default_min_pixels(256, 256)), 2);

    let etag = r.header(header::ETAG).unwrap().to_string();
    assert!(etag.len() == 66 && etag.starts_with('"') && etag.ends_with('"'), "{etag}");
    let again = get(&app, "/api/tile?size=256&hw=4&family=v3&mode=type").await;
    assert_eq!(again.body, r.body);
    assert_eq!(again.header(header::ETAG), Some(etag.as_str()));
    let revalidated = send(&app, "/api/tile?family=v3&mode=type&size=256", &[(header::IF_NONE_MATCH, &etag)]).await;
    assert_eq!(revalidated.status, StatusCode::NOT_MODIFIED);
    assert!(revalidated.body.is_empty());
}

#[tokio::test]
async fn tile_bytes_match_a_direct_render() {
    let q = "family=v1&mode=phase&cx=-0.75&cy=0.1&hw=0.3&size=40&max_iter=5000";
    let r = get(&app(), &format!("/api/tile?{q}")).await;
    let preset = Preset::for_family(Family::V1);
    let spec = ParamRender {
        family: Family::V1,
        mode: ColorMode::Phase,
        window: ParamWindow::new(Complex64::new(-0.75, 0.1), 0.3, 40, 40).unwrap(),
        iter: qrmap_core::IterConfig { max_iter: 5000, ..Default::default() },
        grid: preset.grid,
    };
    assert_eq!(r.body, spec.render().to_ppm());

    let png = send(&app(), &format!("/api/tile?{q}"), &[(header::ACCEPT, "image/webp,image/png,*/*;q=0.8")]).await;
    assert_eq!(png.header(header::CONTENT_TYPE), Some("image/png"));
    assert!(png.body.starts_with(b"\x89PNG"));
    assert_eq!(png.body, spec.render().to_png().unwrap());
    assert_ne!(png.header(header::ETAG), r.header(header::ETAG));

    let refused = send(&app(), &format!("/api/tile?{q}"), &[(header::ACCEPT, "image/png;q=0")]).await;
    assert_eq!(refused.header(header::CONTENT_TYPE), Some("image/x-portable-pixmap"));
}

#[tokio::test]
async fn cache_is_invisible_to_clients() {
    let tiles = [
        "/api/tile?family=v2&mode=phase&size=24",
        "/api/tile?family=v3&mode=type&cx=1&cy=0.5&hw=0.5&size=24",
        "/api/tile?family=v4b&mode=phase&size=24",
    ];
    let cached = app();
    let uncached = router(AppState::new(0));
    let mut first = Vec::new();
    for t in tiles {
        first.push(get(&cached, t).await.body);
    }
    for (k, t) in tiles.iter().enumerate().rev() {
        assert_eq!(get(&uncached, t).await.body, first[k], "{t}");
        assert_eq!(get(&cached, t).await.body, first[k], "{t}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree() {
    let app = router(AppState::new(0));
    let uri = "/api/tile?family=v4a&mode=type&cx=0.5&cy=-0.9&hw=0.4&size=20";
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { get(&app, uri).await.body })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn tile_rejects_bad_requests() {
    let app = app();
    let too_big = get(&app, "/api/tile?family=v3&size=4096").await;
    assert_eq!(too_big.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert!(too_big.json()["error"].as_str().unwrap().contains("2048"));
    for q in [
        "family=v5",
        "family=v9",
        "mode=type",
        "family=v3&mode=spiral",
        "family=v3&size=0",
        "family=v3&size=ten",
        "family=v3&hw=-1",
        "family=v3&cx=nan",
        "family=v3&eps=0",
        "family=v3&max_iter=0",
        "family=v3&grid=1",
    ] {
        let r = get(&app, &format!("/api/tile?{q}")).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{q}");
        assert!(r.json()["error"].is_string(), "{q}");
    }
    let v5 = get(&app, "/api/tile?family=v5").await;
    assert!(v5.json()["error"].as_str().unwrap().contains("genus 1"));
}

#[test]
fn tile_key_is_canonical() {
    let spec = ParamRender::preset(Family::V3, ColorMode::Type);
    let key = TileKey::new(&spec, ImageFormat::Ppm);
    let text = key.canonical();
    let v: Value = serde_json::from_str(&text).unwrap();
    let positions: Vec<usize> = ["center", "confirm_grid", "engine", "eps", "family", "format", "grid", "half_width", "max_iter", "mode", "size"]
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap_or_else(|| panic!("{k} missing from {text}")))
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
    assert_eq!(v["center"], serde_json::json!([0.0, 0.0]));

    let mut negative = spec;
    negative.window.center = Complex64::new(-0.0, -0.0);
    assert_eq!(TileKey::new(&negative, ImageFormat::Ppm).etag(), key.etag());
    let mut moved = spec;
    moved.window.center.re = 1e-12;
    assert_ne!(TileKey::new(&moved, ImageFormat::Ppm).etag(), key.etag());
    assert_ne!(TileKey::new(&spec, ImageFormat::Png).etag(), key.etag());
}

#[tokio::test]
async fn classify_reports_kind_and_map_data() {
    let app = app();
    let r = get(&app, "/api/classify?family=v3&re=0.16&im=-2.2").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["kind"], "TYPE2");
    assert_eq!(v["method"], "floodfill");
    assert_eq!(v["c"], serde_json::json!([0.16, -2.2]));
    assert!(v["b"].is_array() && v["free_critical_point"].is_array());
    assert_eq!(v["cycle"].as_array().unwrap().len(), 3);
    assert_eq!(v["cycle"][1], "infinity");

    let v = get(&app, "/api/classify?family=v2&re=0&im=0").await.json();
    assert_eq!(v["kind"], "INVALID_PARAM");
    assert!(v["invalid_reason"].is_string());

    let v = get(&app, "/api/classify?family=v1&re=0.25&im=0").await.json();
    assert!(["TYPE1", "NOT_ATTRACTED"].contains(&v["kind"].as_str().unwrap()), "{v}");

    assert_eq!(get(&app, "/api/classify?family=v3").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/classify?family=v5&re=0&im=0").await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn flood_fixture_segment_leaves_the_basin() {
    let app = app();
    let (re, im) = FLOOD_T;
    let v = get(&app, &format!("/api/classify?family=v4a&re={re}&im={im}")).await.json();
    assert_eq!((v["kind"].as_str(), v["method"].as_str()), (Some("TYPE2"), Some("floodfill")), "{v}");
    assert_eq!(v["phase"], 3);

    let marked = get(&app, &format!("/api/dynamical?family=v4a&re={re}&im={im}&{FLOOD_VIEW}&overlay=segment")).await;
    assert_eq!(marked.status, StatusCode::OK);
    let marked = marked.image();
    assert!(marked.count_color(SEGMENT_MARK) > 20);

    let plain = get(&app, &format!("/api/dynamical?family=v4a&re={re}&im={im}&{FLOOD_VIEW}&overlay=none")).await.image();
    assert_eq!(plain.count_color(SEGMENT_MARK), 0);
    assert_ne!(plain, marked);

    // the phase-3 basin is white; the segment between the critical point
    // and its attractor must pass over some other color
    let point = |p: &Value| Complex64::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
    let (z, p) = (point(&v["free_critical_point"]), point(&v["cycle"][3]));
    let window = ParamWindow::new(Complex64::new(0.4, 0.07), 0.25, 200, 200).unwrap();
    let off_basin = (0..=400)
        .filter_map(|s| point_to_pixel(&window, z + (p - z) * (s as f64 / 400.0)))
        .filter(|&(i, j)| plain.get(i, j) != WHITE)
        .count();
    assert!(off_basin > 0);
}

#[tokio::test]
async fn dynamical_rejects_bad_requests() {
    let app = app();
    for q in [
        "family=v7&re=1&im=0",
        "family=v3&re=0&im=0",
        "family=v3&im=0",
        "family=v3&re=1&im=0&overlay=arrows",
        "family=v3&re=1&im=0&hw=0",
    ] {
        assert_eq!(get(&app, &format!("/api/dynamical?{q}")).await.status, StatusCode::BAD_REQUEST, "{q}");
    }
    assert_eq!(get(&app, "/api/dynamical?family=v3&re=1&im=0&size=5000").await.status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn cors_headers_are_present() {
    let r = send(&app(), "/api/families", &[(header::ORIGIN, "http://localhost:5173")]).await;
    assert_eq!(r.header(header::ACCESS_CONTROL_ALLOW_ORIGIN), Some("*"));
}
