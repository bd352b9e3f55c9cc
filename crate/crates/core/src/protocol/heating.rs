use super::config::Heating;

/// Mechanical occupation `delta_t_ns` after the end of a write pulse.
pub fn heating_occupation(delta_t_ns: f64, h: &Heating) -> f64 {
    h.n_base + h.a_heat * heating_profile(delta_t_ns, h.tau_rise, h.t_decay)
}

/// Unit-amplitude rise-then-decay shape; times in μs except `delta_t_ns`.
pub fn heating_profile(delta_t_ns: f64, tau_rise_us: f64, t_decay_us: f64) -> f64 {
    let t = delta_t_ns.max(0.0) * 1e-3;
    (1.0 - (-t / tau_rise_us).exp()) * (-t / t_decay_us).exp()
}
