use meshca::metrics::spread_of;
use meshca::nocag::Action;
use meshca::{
    active_conflicts, assign_cca, assign_nocag, build_conflict_graph, make_grid, step_count,
    validate, Channel, ChannelAssignment, ChannelSet, GridSpec, NocagTrace, Topology,
};
use proptest::prelude::*;

fn grid(rows: usize, cols: usize, radios: u8, channels: u8) -> Topology {
    make_grid(&GridSpec::new(rows, cols).radios(radios).channels(channels)).unwrap()
}

/// Rebuilds the assignment from the trace, failing on any repeated channel.
fn replay(t: &Topology, trace: &NocagTrace) -> Result<Vec<ChannelSet>, String> {
    let mut sets = vec![ChannelSet::EMPTY; t.node_count()];
    let add = |sets: &mut Vec<ChannelSet>, n: usize, ch: Channel, at: String| {
        if !sets[n].insert(ch) {
            return Err(format!("{at}: node {n} already has channel {ch}"));
        }
        if sets[n].len() > t.radios(n) as usize {
            return Err(format!("{at}: node {n} has more channels than radios"));
        }
        Ok(())
    };
    for (k, step) in trace.steps.iter().enumerate() {
        let (i, j) = step.pair;
        let at = format!("step {k}");
        match step.action {
            Action::AddBoth { channel, .. } => {
                add(&mut sets, i, channel, at.clone())?;
                add(&mut sets, j, channel, at)?;
            }
            Action::AddI { channel, .. } => add(&mut sets, i, channel, at)?,
            Action::AddJ { channel, .. } => add(&mut sets, j, channel, at)?,
            Action::Swap {
                node,
                added,
                removed,
            } => {
                if !sets[node].remove(removed) {
                    return Err(format!("{at}: node {node} lacks channel {removed}"));
                }
                add(&mut sets, node, added, at)?;
            }
            Action::None | Action::SwapSkipped => {}
        }
    }
    for (k, f) in trace.fills.iter().enumerate() {
        add(&mut sets, f.node, f.channel, format!("fill {k}"))?;
    }
    Ok(sets)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn always_valid(
        rows in 1usize..=10,
        cols in 1usize..=10,
        (radios, channels) in (1u8..=3).prop_flat_map(|r| (Just(r), r..=5u8)),
    ) {
        let t = grid(rows, cols, radios, channels);
        let (ca, trace) = assign_nocag(&t, channels).unwrap();
        let report = validate(&t, &ca).unwrap();
        prop_assert!(report.topology_preserved, "uncovered {:?}", report.uncovered_links);
        prop_assert_eq!(report.unassigned_radios, 0);
        for (n, set) in ca.sets().iter().enumerate() {
            prop_assert_eq!(set.len(), t.radios(n) as usize);
            prop_assert!(set.iter().all(|c| (1..=channels).contains(&c)));
        }
        let rebuilt = replay(&t, &trace).map_err(TestCaseError::fail)?;
        prop_assert_eq!(rebuilt.as_slice(), ca.sets());
    }

    #[test]
    fn deterministic(rows in 1usize..=8, cols in 1usize..=8, radios in 1u8..=3) {
        let t = grid(rows, cols, radios, 4);
        let (a, ta) = assign_nocag(&t, 4).unwrap();
        let (b, tb) = assign_nocag(&t, 4).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn steps_bounded_by_four_per_node(rows in 1usize..=20, cols in 1usize..=20) {
        let t = grid(rows, cols, 2, 3);
        let (_, trace) = assign_nocag(&t, 3).unwrap();
        prop_assert!(step_count(&trace) <= 4 * t.node_count());
        prop_assert_eq!(step_count(&trace), 2 * t.link_count());
    }

    /// Any permutation keeps every link covered; an increasing map into a
    /// wider band also keeps the conflict count.
    #[test]
    fn relabelling(n in 2usize..=6, perm in Just(vec![1u8, 2, 3]).prop_shuffle(), gaps in prop::collection::vec(1u8..=3, 3)) {
        let t = grid(n, n, 2, 3);
        let cg = build_conflict_graph(&t, 2).unwrap();
        let (ca, _) = assign_nocag(&t, 3).unwrap();
        let tid = active_conflicts(&cg, &ca).unwrap();

        prop_assert_eq!(&ca.relabel(&[1, 2, 3]), &ca);
        prop_assert!(validate(&t, &ca.relabel(&perm)).unwrap().topology_preserved);

        let mut increasing: Vec<Channel> = Vec::new();
        let mut next = 0;
        for g in gaps {
            next += g;
            increasing.push(next);
        }
        prop_assert_eq!(active_conflicts(&cg, &ca.relabel(&increasing)).unwrap(), tid);
    }

    #[test]
    fn json_round_trip(rows in 1usize..=6, cols in 1usize..=6, radios in 1u8..=3) {
        let t = grid(rows, cols, radios, 4);
        let (ca, _) = assign_nocag(&t, 4).unwrap();
        prop_assert_eq!(ChannelAssignment::from_json(&ca.to_json()).unwrap(), ca);
        let back = meshca::load_topology(&meshca::save_topology(&t)).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn square_grids_are_fair_and_beat_cca() {
    for n in 3..=7 {
        let t = grid(n, n, 2, 3);
        let cg = build_conflict_graph(&t, 2).unwrap();
        let (nocag, _) = assign_nocag(&t, 3).unwrap();
        let cca = assign_cca(&t, 3).unwrap();
        let (ns, cs) = (spread_of(nocag.sets(), 3), spread_of(cca.sets(), 3));
        assert!(ns <= 4, "{n}x{n}: spread {ns}");
        assert!(cs >= ns, "{n}x{n}: cca {cs} < nocag {ns}");
        assert!(active_conflicts(&cg, &nocag).unwrap() <= active_conflicts(&cg, &cca).unwrap());
    }
}

#[test]
fn walkthrough_assignment() {
    let (ca, trace) = assign_nocag(&grid(2, 2, 2, 3), 3).unwrap();
    let lists: Vec<Vec<Channel>> = ca.sets().iter().map(|s| s.iter().collect()).collect();
    assert_eq!(lists, vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 3]]);
    assert_eq!(step_count(&trace), 8);
}

#[test]
fn step_growth_is_linear() {
    let steps = |n| step_count(&assign_nocag(&grid(n, n, 2, 3), 3).unwrap().1) as f64;
    let ratio = steps(20) / steps(10);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}
