use selberg_core::moebius::{ElementClass, MoebiusElement};
use selberg_core::spectrum::{
    bolza_systole, enumerate_spectrum, enumerate_spectrum_with, genus2_octagon_generators, load_spectrum,
    save_spectrum, spectrum_from_json, spectrum_to_json, systoles, EnumerationConfig, LengthSpectrum,
    MultiplicityConvention, PrimitiveGeodesic,
};
use selberg_core::Error;

fn commutator(a: &MoebiusElement, b: &MoebiusElement) -> MoebiusElement {
    a.compose(b).compose(&a.inverse()).compose(&b.inverse())
}

#[test]
fn octagon_relation_and_generators() {
    let g = genus2_octagon_generators();
    assert_eq!(g.len(), 4);
    let rel = commutator(&g[0], &g[1]).compose(&commutator(&g[2], &g[3]));
    assert!(rel.approx_eq(&MoebiusElement::identity(), 1e-10));
    let l0 = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    for x in &g {
        assert_eq!(x.classify(), ElementClass::Hyperbolic);
        assert!((x.abs_trace() - 2.0 * (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((x.translation_length().unwrap() - l0).abs() < 1e-12);
    }
    assert!((bolza_systole() - l0).abs() < 1e-15);
}

#[test]
fn cyclic_group_has_one_class() {
    let sp = enumerate_spectrum(&[MoebiusElement::diagonal(1.0)], 3.5).unwrap();
    assert_eq!(sp.len(), 1);
    assert!((sp.entries()[0].length - 1.0).abs() < 1e-12);
    assert_eq!(sp.entries()[0].multiplicity, 1);
}

#[test]
fn below_systole_is_empty() {
    let sp = enumerate_spectrum(&genus2_octagon_generators(), 2.5).unwrap();
    assert!(sp.is_empty());
}

#[test]
fn bolza_systole_stable_across_cutoff_and_budget() {
    let gens = genus2_octagon_generators();
    let a = enumerate_spectrum(&gens, 3.2).unwrap();
    let b = enumerate_spectrum(&gens, 4.0).unwrap();
    let cfg = EnumerationConfig { budget: 4e8, ..Default::default() };
    let (c, _) = enumerate_spectrum_with(&gens, 3.2, &cfg).unwrap();
    let l0 = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    for sp in [&a, &b, &c] {
        let sys = systoles(sp).unwrap();
        assert!((sys.l0 - l0).abs() < 1e-9);
        assert_eq!(sys.indices, vec![0]);
    }
    assert_eq!(a.entries()[0].multiplicity, b.entries()[0].multiplicity);
    assert_eq!(a.entries(), c.entries());
    assert_eq!(a.entries()[0].multiplicity, 12);
}

#[test]
fn monotone_in_cutoff_and_idempotent() {
    let gens = genus2_octagon_generators();
    let lo = enumerate_spectrum(&gens, 3.5).unwrap();
    let hi = enumerate_spectrum(&gens, 4.5).unwrap();
    let shared: Vec<_> = hi.entries().iter().filter(|e| e.length <= 3.5).cloned().collect();
    assert_eq!(lo.entries(), &shared[..]);
    let again = enumerate_spectrum(&gens, 4.5).unwrap();
    assert_eq!(hi, again);
}

#[test]
fn second_length_class() {
    // cosh(l/2) = 3 + 2 sqrt 2; nothing lies strictly between it and the systole.
    let sp = enumerate_spectrum(&genus2_octagon_generators(), 5.5).unwrap();
    assert_eq!(sp.len(), 2);
    let l1 = 2.0 * (3.0 + 2.0 * 2f64.sqrt()).acosh();
    assert!((sp.entries()[1].length - l1).abs() < 1e-9);
    assert_eq!(sp.entries()[1].multiplicity, 12);
}

fn same_lengths(a: &LengthSpectrum, b: &LengthSpectrum) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert!((x.length - y.length).abs() < 1e-9);
        assert_eq!(x.multiplicity, y.multiplicity);
    }
}

#[test]
fn invariant_under_permutation_and_conjugation() {
    let gens = genus2_octagon_generators();
    let base = enumerate_spectrum(&gens, 4.0).unwrap();
    let perm = vec![gens[2], gens[0], gens[3], gens[1]];
    same_lengths(&base, &enumerate_spectrum_with(&perm, 4.0, &EnumerationConfig { genus: Some(2), ..Default::default() }).unwrap().0);
    let h = MoebiusElement::new(1.1, 0.2, -0.1, (1.0 - 0.02) / 1.1).unwrap();
    let conj: Vec<_> = gens.iter().map(|g| g.conjugate_by(&h)).collect();
    same_lengths(&base, &enumerate_spectrum(&conj, 4.0).unwrap());
}

#[test]
fn oriented_convention_doubles() {
    let gens = genus2_octagon_generators();
    let cfg = EnumerationConfig { convention: MultiplicityConvention::Oriented, ..Default::default() };
    let (o, stats) = enumerate_spectrum_with(&gens, 4.0, &cfg).unwrap();
    let u = enumerate_spectrum(&gens, 4.0).unwrap();
    assert!(stats.domain_certified);
    assert_eq!(stats.side_pairings, 8);
    for (x, y) in o.entries().iter().zip(u.entries()) {
        assert_eq!(x.multiplicity, 2 * y.multiplicity);
    }
}

#[test]
fn witness_words_reproduce_lengths() {
    let gens = genus2_octagon_generators();
    let sp = enumerate_spectrum(&gens, 4.0).unwrap();
    for e in sp.entries() {
        let w = e.witness_word.as_ref().expect("enumeration records a word");
        let eval = |w: &[i32]| {
            w.iter().fold(MoebiusElement::identity(), |acc, &x| {
                let g = gens[x.unsigned_abs() as usize - 1];
                acc.compose(&if x > 0 { g } else { g.inverse() })
            })
        };
        let inv: Vec<i32> = w.iter().rev().map(|x| -x).collect();
        let l = eval(w).translation_length().unwrap();
        assert!((l - e.length).abs() < 1e-12);
        assert!((eval(&inv).translation_length().unwrap() - l).abs() < 1e-10);
    }
}

#[test]
fn budget_exceeded() {
    let cfg = EnumerationConfig { budget: 10.0, ..Default::default() };
    let r = enumerate_spectrum_with(&genus2_octagon_generators(), 4.0, &cfg);
    assert!(matches!(r, Err(Error::CutoffTooExpensive { .. })));
}

#[test]
fn non_hyperbolic_generator_rejected() {
    let p = MoebiusElement::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let r = enumerate_spectrum(&[p, MoebiusElement::diagonal(1.0)], 3.0);
    assert!(matches!(r, Err(Error::NonHyperbolicElementFound { .. })));
}

#[test]
fn systole_examples() {
    let sp = LengthSpectrum::from_lengths(2, 5.0, &[(1.0, 1), (2.0, 3)]).unwrap();
    let s = systoles(&sp).unwrap();
    assert_eq!((s.l0, s.indices.clone(), s.count), (1.0, vec![0], 1));
    let sp = LengthSpectrum::from_lengths(2, 5.0, &[(1.0, 2), (1.0 + 5e-13, 1)]).unwrap();
    assert_eq!(sp.len(), 1);
    assert_eq!(systoles(&sp).unwrap().count, 3);
    assert!(matches!(systoles(&LengthSpectrum::empty(2, 1.0).unwrap()), Err(Error::EmptySpectrum)));
}

#[test]
fn file_round_trip_is_bit_exact() {
    let sp = enumerate_spectrum(&genus2_octagon_generators(), 4.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bolza.json");
    save_spectrum(&sp, &path).unwrap();
    let back = load_spectrum(&path).unwrap();
    assert_eq!(sp.genus(), back.genus());
    assert_eq!(sp.cutoff().to_bits(), back.cutoff().to_bits());
    for (x, y) in sp.entries().iter().zip(back.entries()) {
        assert_eq!(x.length.to_bits(), y.length.to_bits());
        assert_eq!(x.multiplicity, y.multiplicity);
        assert_eq!(x.witness_word, y.witness_word);
    }
    let sp = LengthSpectrum::new(3, 9.0, vec![PrimitiveGeodesic::new(0.1 + 0.2, 5)]).unwrap();
    assert_eq!(spectrum_from_json(&spectrum_to_json(&sp).unwrap()).unwrap(), sp);
}

#[test]
fn malformed_files_are_format_errors() {
    let neg = r#"{"format_version":1,"genus":2,"cutoff":4.0,"entries":[{"length":"-0x1p+0","multiplicity":1}]}"#;
    assert!(matches!(spectrum_from_json(neg), Err(Error::Format(_))));
    let unsorted = r#"{"format_version":1,"genus":2,"cutoff":4.0,"entries":[
        {"length":"0x1.8p+1","multiplicity":1},{"length":"0x1p+1","multiplicity":1}]}"#;
    assert!(matches!(spectrum_from_json(unsorted), Err(Error::Format(_))));
    let version = r#"{"format_version":7,"genus":2,"cutoff":4.0,"entries":[]}"#;
    assert!(matches!(spectrum_from_json(version), Err(Error::Format(_))));
    assert!(matches!(load_spectrum("/nonexistent/spectrum.json"), Err(Error::Io(_))));
}
