use madec_core::constructions::{layered_needle_instance, normal_form_instance, random_payoffs, twin_instance};
use madec_core::io::{instance_from_str, instance_to_string};
use madec_core::rng::stream_rng;
use madec_core::Kind;

fn round_trip(s: &str) {
    let back = instance_to_string(&instance_from_str(s).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn serialized_instances_round_trip() {
    round_trip(&instance_to_string(&twin_instance(3, 0.1, 0.2).unwrap()).unwrap());
    round_trip(&instance_to_string(&layered_needle_instance(2, 1.0).unwrap()).unwrap());
    let mut rng = stream_rng(1, 0);
    let payoffs = random_payoffs(&[2, 3], 3, &mut rng);
    round_trip(&instance_to_string(&normal_form_instance(&[2, 3], &payoffs, Kind::Cce).unwrap()).unwrap());
}

#[test]
fn malformed_files_name_the_field() {
    let s = instance_to_string(&twin_instance(2, 0.1, 0.2).unwrap()).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
    v["obs"][1]["rewards"] = serde_json::json!("oops");
    let err = instance_from_str(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("obs[1].rewards"), "{err}");
    v.as_object_mut().unwrap().remove("K");
    let err = instance_from_str(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains('K'), "{err}");
}
