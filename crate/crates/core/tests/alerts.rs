mod common;

#[test]
fn fixture_stream_alerts() {
    common::criterion_alerts().unwrap();
}
