//! Short flag syntax for states and windows.

use tricoupler::fock::StateSpec;

/// `vacuum`, `coherent:RE,IM`, `number:N`, `squeezed:R`, `squeezed-mean:NBAR`.
pub fn parse_state(s: &str) -> Result<StateSpec, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let nums = || parse_list(rest);
    match kind {
        "vacuum" if rest.is_empty() => Ok(StateSpec::vacuum()),
        "coherent" => match nums()?.as_slice() {
            [re] => Ok(StateSpec::coherent(*re, 0.0)),
            [re, im] => Ok(StateSpec::coherent(*re, *im)),
            _ => Err(format!("expected coherent:RE[,IM], got {s}")),
        },
        "number" => rest
            .trim()
            .parse()
            .map(|n| StateSpec::Number { n })
            .map_err(|_| format!("expected number:N, got {s}")),
        "squeezed" => match nums()?.as_slice() {
            [r] => Ok(StateSpec::SqueezedVacuum { r: *r }),
            _ => Err(format!("expected squeezed:R, got {s}")),
        },
        "squeezed-mean" => match nums()?.as_slice() {
            [m] if *m >= 0.0 => Ok(StateSpec::squeezed_with_mean_photons(*m)),
            _ => Err(format!("expected squeezed-mean:NBAR with NBAR >= 0, got {s}")),
        },
        _ => Err(format!("unknown state {s:?}")),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// `X_MIN,X_MAX,Y_MIN,Y_MAX`
pub fn parse_window(s: &str) -> Result<[f64; 4], String> {
    match parse_list(s)?.as_slice() {
        &[a, b, c, d] => Ok([a, b, c, d]),
        _ => Err(format!("expected X_MIN,X_MAX,Y_MIN,Y_MAX, got {s}")),
    }
}

/// `NX,NY` or a single `N` for both axes.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let parts: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match parts.map_err(|_| format!("expected NX,NY, got {s}"))?.as_slice() {
        [n] => Ok((*n, *n)),
        [nx, ny] => Ok((*nx, *ny)),
        _ => Err(format!("expected NX,NY, got {s}")),
    }
}
