mod common;

#[test]
fn filter_derivatives_match_finite_differences() {
    common::filter_derivatives(100).unwrap();
}

#[test]
fn score_matches_finite_differences() {
    common::score_vector(100).unwrap();
}

#[test]
fn dlogf_dx_matches_finite_differences() {
    common::dlogf_dx(100).unwrap();
}

#[test]
fn dlogf_dalpha_matches_finite_differences() {
    common::dlogf_dalpha(100).unwrap();
}

#[test]
fn g_dot_matches_finite_differences() {
    common::g_dot_2(100).unwrap();
}
