use sheaf_communities_web::*;

#[test]
fn graph_json_lists_karate() {
    let json: serde_json::Value = serde_json::from_str(&karate_graph().unwrap()).unwrap();
    assert_eq!(json["vertices"], 34);
    assert_eq!(json["edges"].as_array().unwrap().len(), 78);
    assert_eq!(json["edges"][0], serde_json::json!([0, 1]));
}

#[test]
fn deterministic_demo_partition() {
    let view = deterministic_view(0.3, 2.25).unwrap();
    assert_eq!(view.clusters, 4);
    assert!((view.modularity - 0.406969).abs() < 5e-7);
    assert_eq!(view.labels.len(), 34);
    assert_eq!(view.kept.len(), 78);
    let all = deterministic_view(0.0, 1.0).unwrap();
    assert_eq!((all.clusters, all.modularity), (1, 0.0));
    assert!(deterministic_view(1.5, 0.0).is_err());
}

#[test]
fn flow_trajectory_is_sampled_and_seeded() {
    let t = constant_trajectory(4.0, 5, 1000.0, 50).unwrap();
    assert_eq!(t.status, "converged");
    assert_eq!(t.times.len(), t.opinions.len());
    assert_eq!(t.times[0], 0.0);
    assert!(t.opinions.iter().all(|row| row.len() == 34));
    assert!(t.opinions[0].iter().all(|x| x.abs() <= 2.0));
    assert!(t.times.windows(2).all(|w| w[1] > w[0]));
    assert!(t.partition.is_some());
    let again = constant_trajectory(4.0, 5, 1000.0, 50).unwrap();
    assert_eq!(t.opinions, again.opinions);

    let short = constant_trajectory(4.0, 5, 0.1, 3).unwrap();
    assert_eq!(short.status, "aborted");
    assert!(short.partition.is_none());
    assert!(constant_trajectory(4.0, 5, 1.0, 0).is_err());
}

#[test]
fn modularity_curve_shape() {
    let curve = nonconstant_curve(&[0.0, 0.1, 1.0], 200, 1).unwrap();
    assert_eq!(curve.mean.len(), 3);
    assert!((curve.mean[0] - 0.191).abs() < 0.02);
    assert!(curve.mean[1] > curve.mean[0]);
    assert_eq!((curve.mean[2], curve.sd[2]), (0.0, 0.0));
    assert!(nonconstant_curve(&[0.5], 0, 1).is_err());
}
