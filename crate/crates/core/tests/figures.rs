use lambdaext::verify::{check_figure, check_figure_with, figure};
use lambdaext::modules::{module_from_str, resolve};

#[test]
fn sphere_chart() {
    let r = check_figure("sphere").unwrap();
    assert!(r.passed(), "{}", r);
    assert_eq!(r.cells, 18 * 11);
    assert!(r.lines_checked > 40);
}

#[test]
fn low_stem_module_charts() {
    for id in ["m2_relative", "p18_15", "p_13_16", "p14_13_16"] {
        let r = check_figure(id).unwrap();
        assert!(r.passed(), "{}", r);
    }
}

#[test]
fn errata_are_confirmed_by_the_engine() {
    let r = check_figure("m2_relative").unwrap();
    assert_eq!(r.errata_confirmed, vec![(17, 4, 0, 1)]);
    for id in ["p_13_16", "p14_13_16"] {
        let r = check_figure(id).unwrap();
        assert_eq!(r.errata_confirmed, vec![(16, 3, 0, 1), (16, 4, 1, 0)], "{}", id);
    }
}

#[test]
fn dropped_action_is_caught() {
    let fig = figure("m2_relative").unwrap();
    let broken = module_from_str("[header]\nname = \"split\"\n[[cells]]\nid = \"e1\"\ndegree = 1\n[[cells]]\nid = \"e2\"\ndegree = 2\n").unwrap();
    let r = check_figure_with(&fig, &broken).unwrap();
    assert!(!r.passed());
    let good = resolve("P(1,2)", None).unwrap();
    assert!(check_figure_with(&fig, &good).unwrap().passed());
}

#[test]
fn bundled_w1() {
    use lambdaext::ext::ext_dim;
    use lambdaext::modules::resolve;
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/modules");
    let w = resolve("file:W1.mod", Some(&dir)).unwrap();
    // stem 62: nothing at s = 0, then e47 h4 and e47 h0 h4
    assert_eq!(ext_dim(&w, 0, 62).unwrap(), 0);
    assert_eq!(ext_dim(&w, 1, 63).unwrap(), 1);
    assert_eq!(ext_dim(&w, 2, 64).unwrap(), 1);
    assert_eq!(ext_dim(&w, 1, 64).unwrap(), 0);
    let m2 = resolve("file:M2.mod", Some(&dir)).unwrap();
    let p = resolve("P(1,2)", None).unwrap();
    assert_eq!(m2.fingerprint(), p.fingerprint());
}
