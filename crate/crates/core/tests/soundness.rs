//! Spectra of real Seidel matrices must never be declared nonexistent.

use eqlines_core::classes::ClassStore;
use eqlines_core::nonexist::{verdict, Conclusion, NonexistError, SpectrumCandidate, VerdictOptions};
use eqlines_core::seidel::{Graph, SeidelMatrix};

fn realized() -> Vec<(String, Graph)> {
    let petersen = Graph::from_edges(
        10,
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 0),
            (0, 5),
            (1, 6),
            (2, 7),
            (3, 8),
            (4, 9),
            (5, 7),
            (7, 9),
            (9, 6),
            (6, 8),
            (8, 5),
        ],
    )
    .unwrap();
    let mut out = vec![("pentagon".to_string(), Graph::cycle(5)), ("petersen".to_string(), petersen)];
    for n in 3..=9 {
        out.push((format!("empty{n}"), Graph::empty(n)));
        out.push((format!("complete{n}"), Graph::complete(n)));
    }
    // K_{3,3} plus isolated vertices, and a perfect matching on 8 vertices.
    out.push((
        "k33".into(),
        Graph::from_edges(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)]).unwrap(),
    ));
    out.push(("matching8".into(), Graph::from_edges(8, &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap()));
    out
}

#[test]
fn realized_spectra_are_never_refuted() {
    let classes = ClassStore::new(None, 5, 1, 20_000);
    let opts = VerdictOptions { classes: &classes, search_limit: 200_000 };
    let mut checked = 0;
    for (name, g) in realized() {
        let p = SeidelMatrix::from_graph(&g).char_poly();
        let Some(spectrum) = SpectrumCandidate::from_char_poly(&p) else { continue };
        assert_eq!(spectrum.char_poly(), p, "{name}");
        match verdict(&spectrum, 1, &opts) {
            Ok(v) => {
                assert_ne!(v.conclusion, Conclusion::Nonexistent, "{name}: {}", spectrum);
                checked += 1;
            }
            Err(NonexistError::Unsupported(_) | NonexistError::Class(_)) => {}
            Err(e) => panic!("{name}: {e}"),
        }
    }
    assert!(checked >= 5, "only {checked} spectra reached a verdict");
}

#[test]
fn spectrum_text_round_trip() {
    for s in ["(x+5)^33*(x-9)^12*(x-11)^4*(x-13)", "(x-3)^5*(x+3)^5", "(x^2-5)^2"] {
        let c: SpectrumCandidate = s.parse().unwrap();
        let again: SpectrumCandidate = c.to_string().parse().unwrap();
        assert_eq!(again.char_poly(), c.char_poly());
        assert_eq!(again.order, c.order);
    }
}
