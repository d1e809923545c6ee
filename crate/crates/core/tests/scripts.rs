use lambdaext::verify::run_script;

fn run(name: &str, text: &str) {
    let r = run_script(text, None).unwrap();
    assert!(r.passed(), "{}\n{}\n{:?}", name, r, r.first_failure().and_then(|f| f.witness.clone()));
}

#[test]
fn relations() {
    run("relations", include_str!("../data/scripts/relations.lx"));
}

#[test]
fn b0_congruence() {
    run("b0", include_str!("../data/scripts/b0.lx"));
}

#[test]
fn beta187_transfer() {
    run("beta187", include_str!("../data/scripts/beta187.lx"));
}

#[test]
fn pt62_equation() {
    run("pt62", include_str!("../data/scripts/pt62_equation.lx"));
}

#[test]
fn p62_47_extensions() {
    run("p62_47", include_str!("../data/scripts/p62_47_extension.lx"));
}
