use std::fs;
use std::path::{Path, PathBuf};

use gradsk::descriptor::GradedDivAlgDesc;
use gradsk::graded::{MonomialGradedRing, MonomialRingSpec};
use gradsk::sk1::{sk1, sk1_bruteforce, Sk1Input, Sk1Registry};

fn rings() -> Vec<(PathBuf, MonomialGradedRing)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/rings");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v.into_iter()
        .map(|p| {
            let spec: MonomialRingSpec = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
            let r = MonomialGradedRing::from_spec(&spec).unwrap();
            (p, r)
        })
        .collect()
}

#[test]
fn selected_strategy_matches_brute_force() {
    let reg = Sk1Registry::standard();
    for (p, r) in rings() {
        let fast = reg.run(&Sk1Input::from_ring(&r), None).unwrap();
        let slow = sk1_bruteforce(&r).unwrap();
        assert_eq!(
            fast.group.as_ref().map(|g| g.factors_u64()),
            slow.group.as_ref().map(|g| g.factors_u64()),
            "{}",
            p.display()
        );
        assert!(fast.n_torsion() && slow.n_torsion());
    }
}

#[test]
fn descriptors_survive_json() {
    for (p, r) in rings() {
        let d = r.descriptor();
        let back: GradedDivAlgDesc = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d, "{}", p.display());
        let a = sk1(&d);
        let b = sk1(&back);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a.group.map(|g| g.factors_u64()), b.group.map(|g| g.factors_u64())),
            (Err(a), Err(b)) => assert_eq!(a.exit_code(), b.exit_code()),
            _ => panic!("{}: round trip changed the outcome", p.display()),
        }
    }
}
