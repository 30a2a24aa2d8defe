use tzmpc_core::clique::{clique_build_oracle, Clique, CliqueConfig};
use tzmpc_core::graph::{generate_graph, GraphKind};
use tzmpc_core::hopset::dump;
use tzmpc_core::mpc::pipeline::mpc_build_sketches;
use tzmpc_core::pipeline::{build_reference, Mode, PipelineConfig};
use tzmpc_core::tz::SketchSet;
use tzmpc_core::{Ratio, WeightedGraph};

fn fixtures() -> Vec<(&'static str, WeightedGraph)> {
    vec![
        ("path64", generate_graph(GraphKind::Path, 64, 0.0, 10, 1).unwrap()),
        ("grid49", generate_graph(GraphKind::Grid, 49, 0.0, 12, 2).unwrap()),
        ("er80", generate_graph(GraphKind::ErdosRenyi, 80, 0.08, 30, 3).unwrap()),
        ("ba70", generate_graph(GraphKind::Preferential, 70, 2.0, 25, 4).unwrap()),
    ]
}

fn config(mode: Mode, k: u32, beta: Option<u64>) -> PipelineConfig {
    let mut c = PipelineConfig::new(k, Ratio::new(1, 2).unwrap(), mode, 5).unwrap();
    c.hopset.beta_override = beta;
    c
}

fn same_sketches(a: &SketchSet, b: &SketchSet) -> bool {
    a.sketches == b.sketches && a.k == b.k && a.certificate == b.certificate
}

#[test]
fn executors_agree_with_the_reference() {
    for (name, g) in fixtures() {
        for (k, beta) in [(2, None), (2, Some(6)), (3, Some(4))] {
            let reference = build_reference(&g, &config(Mode::Exact, k, beta)).unwrap();
            for mode in [Mode::Exact, Mode::Extra] {
                let b = mpc_build_sketches(&g, &config(mode, k, beta)).unwrap();
                assert_eq!(dump(&b.hopset), dump(&reference.hopset), "{name} {mode:?} k={k} beta={beta:?}");
                assert!(same_sketches(&b.sketches, &reference.sketches), "{name} {mode:?} k={k} beta={beta:?}");
                assert_eq!(b.metrics().violations, 0);
            }
            let mut cc = Clique::new(&g, CliqueConfig::new(5)).unwrap();
            let cb = clique_build_oracle(&mut cc, &config(Mode::Exact, k, beta)).unwrap();
            assert_eq!(dump(&cb.hopset), dump(&reference.hopset), "{name} clique k={k}");
            assert!(same_sketches(cc.oracle().unwrap(), &reference.sketches), "{name} clique k={k}");
        }
    }
}

#[test]
fn overridden_beta_gives_a_nonempty_hopset() {
    let g = generate_graph(GraphKind::Path, 64, 0.0, 10, 1).unwrap();
    let r = build_reference(&g, &config(Mode::Exact, 2, Some(4))).unwrap();
    assert!(!r.hopset.is_empty());
    assert_eq!(r.hop, 4);
}
