//! Structural sanity checks on built frames: commutation of W^C with
//! K^C, perfect recall in cut-vector form, characteristic-formula
//! uniqueness, termination signalling, and the limit-world quotient.

use super::{Depth, SecurityFrame, WriteRel};
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct FrameReport {
    /// (w1, w2, w3) with w1 Wc w2 Kc w3 but no w4 with w1 Kc w4 Wc w3
    /// (or the swapped pattern).
    pub commutation_failures: Vec<(usize, usize, usize)>,
    /// (world, successor) whose knowledge fails to refine monotonically.
    pub perfect_recall_failures: Vec<(usize, usize)>,
    pub characteristic_formulae: bool,
    /// Halted worlds whose K-class contains a non-halted world; only
    /// meaningful as a failure when the context claims to signal
    /// termination.
    pub termination_signal_failures: Vec<(usize, usize)>,
    /// Limit worlds not K-related to their stabilization prefix, or
    /// disagreeing with it on a supported atom.
    pub limit_failures: Vec<usize>,
    /// Event-endorsed permission relations are not guaranteed transitive;
    /// report violations instead of closing them silently.
    pub wp_intransitive: Vec<(usize, usize, usize)>,
}

impl FrameReport {
    pub fn ok_for(&self, signals_termination: bool) -> bool {
        self.commutation_failures.is_empty()
            && self.perfect_recall_failures.is_empty()
            && self.characteristic_formulae
            && (!signals_termination || self.termination_signal_failures.is_empty())
            && self.limit_failures.is_empty()
            && self.wp_intransitive.is_empty()
    }
}

pub fn check_frame_properties(frame: &SecurityFrame) -> FrameReport {
    let mut report = FrameReport {
        characteristic_formulae: true,
        ..Default::default()
    };
    let n = frame.n_worlds();

    for rels in frame.agents.iter().map(|a| frame.rels(a).unwrap()) {
        // (a) commutation by quadrant search. The property is quantified
        // over the squares the equivalence proofs complete: all three
        // given worlds initial. (An unclocked agent can relate an initial
        // world to a stuttering successor, and no initial-only W^C step
        // leads back from there, so the unrestricted quantification fails
        // on any such frame; synchronous frames satisfy it outright.)
        for w1 in 0..n {
            if !frame.is_initial(w1) {
                continue;
            }
            let wc1 = rels.wc.class_mask(w1);
            for w2 in wc1.iter_set() {
                if w2 == w1 {
                    continue;
                }
                for w3 in rels.kc.class_mask(w2).iter_set() {
                    if !frame.is_initial(w3) {
                        continue;
                    }
                    // need w4 with w1 Kc w4 Wc w3
                    let ok = rels
                        .kc
                        .class_mask(w1)
                        .intersects(rels.wc.class_mask(w3));
                    if !ok {
                        report.commutation_failures.push((w1, w2, w3));
                    }
                }
            }
        }

        // (b) perfect recall: along each chain, the successor's knowledge
        // set stays within the future closure of the predecessor's
        for (a, b) in (0..frame.runs.len()).map(|r| frame.span(r)) {
            for w in a..b.saturating_sub(1) {
                let succ = w + 1;
                let here = frame.up_t(rels.kc.class_mask(w));
                if !rels.kc.class_mask(succ).is_subset(&here) {
                    report.perfect_recall_failures.push((w, succ));
                }
            }
        }

        // (d) signals termination: halted worlds are known to be halted
        for w in frame.halted_mask().iter_set() {
            for other in rels.kc.class_mask(w).iter_set() {
                if !frame.halted_at(other) {
                    report.termination_signal_failures.push((w, other));
                }
            }
        }

        // limit quotient: the limit world carries exactly the knowledge of
        // its stabilization prefix (asynchronous contexts only; a clock
        // legitimately separates them)
        if !frame.synchronous {
            for (ri, run) in frame.runs.iter().enumerate() {
                if !run.diverging {
                    continue;
                }
                let lim = frame.world_index(ri, Depth::Limit).unwrap();
                let stab = frame.world_index(ri, Depth::At(run.max_depth())).unwrap();
                if !rels.kc.related(lim, stab) {
                    report.limit_failures.push(lim);
                }
            }
        }

        // event-endorsed W^P transitivity
        if let WriteRel::Explicit(rows) = &rels.wp {
            'outer: for a in 0..n {
                for b in rows[a].iter_set() {
                    for c in rows[b].iter_set() {
                        if !rows[a].get(c) {
                            report.wp_intransitive.push((a, b, c));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    // (c) characteristic formulae: distinct worlds have distinct future
    // cones, so (run, depth) identifies each world's characteristic set
    let mut seen = std::collections::HashSet::new();
    for w in &frame.worlds {
        if !seen.insert((w.run, w.depth)) {
            report.characteristic_formulae = false;
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::build_frame;
    use crate::lang::Program;
    use crate::policy::SecurityContext;
    use crate::value::Value;

    fn prog(src: &str, decls: &[(&str, &[i64])]) -> Program {
        let declared: Vec<(String, Vec<Value>)> = decls
            .iter()
            .map(|(v, d)| (v.to_string(), d.iter().map(|n| Value::Int(*n)).collect()))
            .collect();
        Program::new(src, &declared).unwrap()
    }

    #[test]
    fn standard_frames_pass_all_checks() {
        let p = prog(
            "if u = 1 then p := s",
            &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])],
        );
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f = build_frame(&p, &ctx, 1000).unwrap();
        let report = check_frame_properties(&f);
        assert!(report.ok_for(true), "{report:?}");
    }

    #[test]
    fn termination_signalling_holds_by_construction_when_flagged() {
        let p = prog(
            "(if u = 1 then p := s); if s && h = 1 then loop",
            &[("u", &[0, 1]), ("s", &[0, 1]), ("h", &[0, 1]), ("p", &[0])],
        );
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f = build_frame(&p, &ctx, 1000).unwrap();
        let report = check_frame_properties(&f);
        assert!(report.termination_signal_failures.is_empty());
        assert!(report.ok_for(true), "{report:?}");
    }

    #[test]
    fn without_the_flag_halted_worlds_mix_with_diverging_limits() {
        // the xor variant diverges for some h while look-alike runs halt
        let p = prog(
            "(if u = 1 then p := s); if s && (u ^ h) = 1 then loop",
            &[("u", &[0, 1]), ("s", &[0, 1]), ("h", &[0, 1]), ("p", &[0])],
        );
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"]);
        let f = build_frame(&p, &ctx, 1000).unwrap();
        let report = check_frame_properties(&f);
        assert!(!report.termination_signal_failures.is_empty());
        // and at least one failure pairs a halted world with a limit world
        let pairs_limit = report.termination_signal_failures.iter().any(|&(_, w)| {
            matches!(f.world(w).depth, Depth::Limit)
        });
        assert!(pairs_limit);
    }
}
