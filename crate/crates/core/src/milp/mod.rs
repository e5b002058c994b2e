//! Offline mixed-integer model of ECMP load balancing with service chains.

mod check;
mod lp;
mod model;
mod oracle;

pub use check::{
    candidate_from_routing, check_solution, CheckError, ConstraintViolation, DomainViolation,
    FeasibilityReport, SolutionCandidate, FEASIBILITY_TOL,
};
pub use lp::{export_lp, LpError, LpFile, LpRow};
pub use model::{
    build_model, expected_counts, Constraint, Domain, Family, MilpModel, Row, Sense, VarIdx, VarKey,
    Variable, STRICT_DELTA,
};
pub use oracle::{
    combination_count, evaluate_weights, exact_oracle, exact_oracle_with, Evaluation, OracleConfig,
    OracleEntry, OracleError, OracleResult, DEFAULT_LIMIT,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecmp::WeightVector;
    use crate::model::{GraphBuilder, NfviGraph, NodeId, ServiceDemand, VnfId};

    fn diamond(top: f64, bottom: f64) -> NfviGraph {
        GraphBuilder::new()
            .node("s", 100.0)
            .node("a", 100.0)
            .node("b", 100.0)
            .node("t", 100.0)
            .link("sa", "s", "a", top)
            .link("sb", "s", "b", bottom)
            .link("at", "a", "t", top)
            .link("bt", "b", "t", bottom)
            .build()
            .unwrap()
    }

    fn st_demand(volume: f64, chain: Vec<VnfId>) -> ServiceDemand {
        ServiceDemand {
            id: 0,
            source: NodeId(0),
            destination: NodeId(3),
            volume,
            chain,
        }
    }

    #[test]
    fn diamond_variable_counts() {
        let g = diamond(10.0, 10.0);
        let m = build_model(&g, &[st_demand(4.0, vec![])], 2).unwrap();
        assert_eq!(m.count_variables(|k| matches!(k, VarKey::Flow { .. })), 8);
        assert_eq!(m.count_variables(|k| matches!(k, VarKey::OnPath { .. })), 4);
        assert_eq!(m.count_variables(|k| matches!(k, VarKey::Uses { .. })), 8);
        assert_eq!(m.count_by_family(), expected_counts(&g, &[st_demand(4.0, vec![])], 2));
        assert_eq!(m.big_m(), 10.0);
    }

    #[test]
    fn zero_demands_leave_only_weight_bounds() {
        let g = diamond(10.0, 10.0);
        let m = build_model(&g, &[], 2).unwrap();
        let counts = m.count_by_family();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&Family::WeightBound], 4);
        let text = LpFile::from_model(&m).render();
        assert!(text.contains("Minimize\n obj: r\n"));
        assert!(text.contains(" w_0 >= 1\n"));
        // every bound holds at w = 1, r = 0
        let mut cand = SolutionCandidate::empty(&m);
        for i in 0..m.variables().len() {
            cand.set(VarIdx(i), if i < 4 { 1.0 } else { 0.0 });
        }
        let rep = check_solution(&m, &cand).unwrap();
        assert!(rep.is_feasible());
        assert_eq!(rep.objective, 0.0);
    }

    #[test]
    fn binaries_section_lists_u_and_b() {
        let g = diamond(10.0, 10.0);
        let m = build_model(&g, &[st_demand(4.0, vec![])], 2).unwrap();
        let lp = LpFile::parse(&LpFile::from_model(&m).render()).unwrap();
        assert_eq!(lp.binaries.len(), 4 + 8);
        assert!(lp.binaries.iter().all(|b| b.starts_with("u_") || b.starts_with("b_")));
        assert!(lp.generals.iter().all(|b| b.starts_with("w_") || b.starts_with("l_")));
    }

    #[test]
    fn lp_round_trip_is_byte_identical() {
        let mut b = GraphBuilder::new();
        b.node("s", 7.5)
            .node("a", 3.0)
            .node("t", 1.0)
            .host("a", "fw", 0.3)
            .link("sa", "s", "a", 12.5)
            .link("at", "a", "t", 0.1)
            .link("st", "s", "t", 3.0);
        let g = b.build().unwrap();
        let demands = [ServiceDemand {
            id: 0,
            source: NodeId(0),
            destination: NodeId(2),
            volume: 1.0 / 3.0,
            chain: vec![VnfId(0)],
        }];
        let m = build_model(&g, &demands, 3).unwrap();
        let written = LpFile::from_model(&m);
        let text = written.render();
        let parsed = LpFile::parse(&text).unwrap();
        assert_eq!(parsed, written);
        assert_eq!(parsed.render(), text);
        assert_eq!(parsed.count_by_family(), m.count_by_family());
    }

    #[test]
    fn lp_parser_rejects_garbage() {
        assert!(LpFile::parse("Minimize\n obj: r\nEnd\n").is_err());
        assert!(LpFile::parse("Minimize\n obj: r\nSubject To\n c: x <= 1 2\nEnd\n").is_err());
        assert!(LpFile::parse("x\n").is_err());
    }

    fn symmetric_candidate() -> (MilpModel, SolutionCandidate) {
        let g = diamond(10.0, 10.0);
        let demands = [st_demand(4.0, vec![])];
        let m = build_model(&g, &demands, 2).unwrap();
        let (cand, _) = candidate_from_routing(&m, &g, &demands, &WeightVector::unit(&g)).unwrap();
        (m, cand)
    }

    #[test]
    fn symmetric_split_is_feasible() {
        let (m, cand) = symmetric_candidate();
        let rep = check_solution(&m, &cand).unwrap();
        assert!(rep.is_feasible(), "{:?}", rep);
        assert_eq!(rep.objective, 0.2);
    }

    #[test]
    fn perturbed_flow_breaks_balance() {
        let (m, mut cand) = symmetric_candidate();
        // x on link s->a for flow 0: a is a relay node
        let key = VarKey::Flow { link: 0, flow: 0, demand: 0 };
        let before = cand.get_key(&m, key).unwrap();
        cand.set_key(&m, key, before + 1.0);
        let rep = check_solution(&m, &cand).unwrap();
        assert!(rep
            .violations_of(Family::FlowBalanceRelay)
            .any(|v| v.row == "c1_d0_v1"));
    }

    #[test]
    fn inconsistent_distance_breaks_path_length() {
        let (m, mut cand) = symmetric_candidate();
        cand.set_key(&m, VarKey::Distance { node: 1, target: 3 }, 2.0);
        let rep = check_solution(&m, &cand).unwrap();
        assert!(rep.violations_of(Family::PathLength).count() > 0);
    }

    #[test]
    fn missing_value_is_an_error() {
        let g = diamond(10.0, 10.0);
        let m = build_model(&g, &[], 1).unwrap();
        let cand = SolutionCandidate::empty(&m);
        assert_eq!(
            check_solution(&m, &cand).unwrap_err(),
            CheckError::MissingVariable("w_0".into())
        );
    }

    #[test]
    fn oracle_prefers_wide_top_path() {
        let g = diamond(10.0, 2.0);
        let res = exact_oracle(&g, &[st_demand(8.0, vec![])], 2).unwrap();
        assert_eq!(res.evaluated, 16);
        let (w, r) = res.best.clone().unwrap();
        assert_eq!(r, 0.8);
        assert_eq!(w.as_slice(), &[1, 1, 1, 2]);
        // equal weights split 4/4 and overload the bottom links
        let equal = res.log.iter().find(|e| e.weights.as_slice() == [1, 1, 1, 1]).unwrap();
        assert!(!equal.feasible);
        assert_eq!(equal.r, 2.0);
        assert_eq!(res.log_csv().lines().count(), 17);
    }

    #[test]
    fn oracle_single_link() {
        let g = GraphBuilder::new()
            .node("s", 0.0)
            .node("t", 0.0)
            .link("st", "s", "t", 10.0)
            .build()
            .unwrap();
        let d = ServiceDemand {
            id: 0,
            source: NodeId(0),
            destination: NodeId(1),
            volume: 5.0,
            chain: vec![],
        };
        let res = exact_oracle(&g, &[d], 3).unwrap();
        assert!(res.log.iter().all(|e| e.feasible && e.r == 0.5));
        assert_eq!(res.best.unwrap().0.as_slice(), &[1]);
    }

    #[test]
    fn oracle_steers_through_the_only_host() {
        let mut b = GraphBuilder::new();
        b.node("s", 100.0)
            .node("a", 100.0)
            .node("b", 100.0)
            .node("t", 100.0)
            .link("sa", "s", "a", 10.0)
            .link("sb", "s", "b", 10.0)
            .link("at", "a", "t", 10.0)
            .link("bt", "b", "t", 10.0)
            .host("b", "ids", 1.0);
        let g = b.build().unwrap();
        let res = exact_oracle(&g, &[st_demand(8.0, vec![VnfId(0)])], 2).unwrap();
        assert_eq!(res.best_r(), Some(0.8));
        let w = res.best.unwrap().0;
        let eval = evaluate_weights(&g, &[st_demand(8.0, vec![VnfId(0)])], &w);
        assert_eq!(eval.allocation.link_loads(), vec![0.0, 8.0, 0.0, 8.0]);
    }

    #[test]
    fn oracle_guard() {
        let g = diamond(1.0, 1.0);
        let mut cfg = OracleConfig::new(10);
        cfg.limit = 1000;
        assert_eq!(
            exact_oracle_with(&g, &[], &cfg).unwrap_err(),
            OracleError::TooManyCombinations { count: 10_000, limit: 1000 }
        );
        cfg.force = true;
        cfg.record_log = false;
        assert_eq!(exact_oracle_with(&g, &[], &cfg).unwrap().evaluated, 10_000);
    }

    #[test]
    fn oracle_reports_infeasible_instances() {
        let g = diamond(1.0, 1.0);
        let res = exact_oracle(&g, &[st_demand(8.0, vec![])], 2).unwrap();
        assert!(res.best.is_none());
        assert!(res.log.iter().all(|e| !e.feasible));
    }
}
