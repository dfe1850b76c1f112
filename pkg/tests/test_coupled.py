from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avmkit.coupled import (
    APPROACH_NAMES,
    approach_partition,
    build_control_behavior,
    build_coupled_model,
    build_preventive_behavior,
    check_approach_alignment,
    check_mapping,
    check_synchronization,
    coupled_diagnostics,
    mapping_process,
)
from avmkit.lts import Path, Transition, build_behavior, is_valid_path
from avmkit.report import ModelValidationError

from generators import random_behavior

PROTECTION_PATH = Path(
    ("SystemProtection", "PCProtection", "RealTimeProtection"), ("offline", "auto")
)


def rebuild(coupled, *, preventive=None, control=None, mapping=None, approaches=None):
    return build_coupled_model(
        preventive or coupled.preventive,
        control or coupled.control,
        mapping or coupled.mapping,
        approaches or coupled.approaches,
        name=coupled.name,
    )


def drop_transition(behavior, source, label, target):
    kept = [t for t in behavior.transitions if t != Transition(source, label, target)]
    assert len(kept) == len(behavior.transitions) - 1
    return build_behavior(behavior.states, behavior.initial, behavior.labels, kept,
                          behavior.finals)


def mapping_dict(mapping):
    return {state: list(paths) for state, paths in mapping.entries}


def partition_dict(partition):
    return {
        a.name: (set(a.control_states), set(a.preventive_states))
        for a in partition.approaches
    }


class TestBuildCoupledModel:
    def test_bundled_model_is_valid(self, coupled):
        assert coupled.mapping.mapped_states == frozenset(
            {"NotActivated", "Activated", "Process", "Recognition", "Done", "Aborted"}
        )
        assert coupled.mapping.exempt == frozenset({"End"})

    def test_single_state_mapping_entry(self, coupled):
        assert coupled.mapping.paths_for("Process") == (Path(("DetectingFiles",)),)

    def test_mapping_into_control_behavior_rejected(self, coupled):
        bad = mapping_dict(coupled.mapping)
        bad["NotActivated"] = [Path(("Activated",))]
        with pytest.raises(ModelValidationError) as err:
            rebuild(coupled, mapping=mapping_process(bad, coupled.mapping.exempt))
        assert any(f.code == "cross-behavior-reference" and f.subject == "Activated"
                   for f in err.value.findings)

    def test_unmapped_state_rejected(self, coupled):
        entries = mapping_dict(coupled.mapping)
        del entries["Process"]
        with pytest.raises(ModelValidationError) as err:
            rebuild(coupled, mapping=mapping_process(entries, coupled.mapping.exempt))
        assert any(f.code == "partial-mapping" and f.subject == "Process"
                   for f in err.value.findings)

    def test_overlapping_approach_rejected(self, coupled):
        assignments = partition_dict(coupled.approaches)
        assignments["Removal"][1].add("CheckCleaningOperations")
        with pytest.raises(ModelValidationError) as err:
            rebuild(coupled, approaches=approach_partition(assignments))
        assert any(f.code == "overlapping-approach" and
                   f.subject == "CheckCleaningOperations" for f in err.value.findings)

    def test_exempt_conflict_rejected(self, coupled):
        with pytest.raises(ModelValidationError) as err:
            rebuild(coupled, mapping=mapping_process(
                mapping_dict(coupled.mapping), coupled.mapping.exempt | {"Done"}))
        assert any(f.code == "exempt-conflict" for f in err.value.findings)

    def test_broken_path_still_constructible(self, coupled):
        # triple validity is check_mapping's job, not construction's
        trimmed = build_preventive_behavior(
            drop_transition(coupled.preventive.base, "PCProtection", "auto",
                            "RealTimeProtection"))
        model = rebuild(coupled, preventive=trimmed)
        assert coupled_diagnostics(model.preventive, model.control, model.mapping,
                                   model.approaches) == []


class TestCheckMapping:
    def test_bundled_passes(self, coupled):
        report = check_mapping(coupled)
        assert report.passed
        for state in ("NotActivated", "Activated"):
            assert coupled.mapping.paths_for(state) == (PROTECTION_PATH,)

    def test_deleted_transition_reports_broken_triple(self, coupled):
        trimmed = build_preventive_behavior(
            drop_transition(coupled.preventive.base, "PCProtection", "auto",
                            "RealTimeProtection"))
        report = check_mapping(rebuild(coupled, preventive=trimmed))
        assert not report.passed
        broken = [f for f in report.findings if f.code == "invalid-mapped-path"]
        assert broken
        assert all("PCProtection -auto-> RealTimeProtection" in f.detail for f in broken)

    def test_fully_exempt_warns(self, coupled):
        model = rebuild(coupled, mapping=mapping_process({}, coupled.control.base.states))
        report = check_mapping(model)
        assert report.passed
        assert any(f.code == "fully-exempt-mapping" and "fully exempt mapping" in f.detail
                   for f in report.findings)

    def test_initial_not_anchored_warns(self, coupled):
        entries = mapping_dict(coupled.mapping)
        entries["NotActivated"] = [Path(("PCProtection", "RealTimeProtection"), ("auto",))]
        report = check_mapping(rebuild(coupled, mapping=mapping_process(
            entries, coupled.mapping.exempt)))
        assert report.passed  # a warning, not a failure
        assert any(f.code == "initial-mapping-start" for f in report.findings)

    def test_pass_iff_every_path_valid(self, coupled):
        report = check_mapping(coupled)
        recheck = all(
            is_valid_path(coupled.preventive.base, path)
            for _, paths in coupled.mapping.entries
            for path in paths
        )
        assert report.passed == recheck

    def test_every_breaking_deletion_is_caught(self, coupled):
        mapped_triples = {
            t
            for _, paths in coupled.mapping.entries
            for path in paths
            for t in path.triples()
        }
        for t in coupled.preventive.base.transitions:
            trimmed = build_preventive_behavior(
                drop_transition(coupled.preventive.base, t.source, t.label, t.target))
            report = check_mapping(rebuild(coupled, preventive=trimmed))
            assert report.passed == (t not in mapped_triples), t


class TestApproachAlignment:
    def test_bundled_passes(self, coupled):
        report = check_approach_alignment(coupled)
        assert report.passed
        # uncovered states are reported, not failed
        assert any(f.code == "uncovered-states" for f in report.findings)

    def test_recognition_maps_inside_identification(self, coupled):
        identification = coupled.approaches.get("Identification")
        assert identification.control_states == frozenset({"Recognition"})
        assert identification.preventive_states == frozenset({"CheckCleaningOperations"})

    def test_done_maps_to_deliver_safe_status(self, coupled):
        assert coupled.mapping.paths_for("Done") == (Path(("DeliverSafeStatus",)),)
        assert "DeliverSafeStatus" in coupled.approaches.get("Removal").preventive_states

    def test_moving_cleaning_ops_breaks_alignment(self, coupled):
        assignments = partition_dict(coupled.approaches)
        assignments["Identification"][1].discard("CheckCleaningOperations")
        assignments["Removal"][1].add("CheckCleaningOperations")
        model = rebuild(coupled, approaches=approach_partition(assignments))
        report = check_approach_alignment(model)
        assert not report.passed
        assert any(
            f.code == "approach-misalignment" and f.subject == "Recognition"
            and "CheckCleaningOperations" in f.detail
            for f in report.findings
        )

    def test_invariant_under_renaming(self, coupled):
        def rename(name):
            return f"X_{name}"

        def rename_behavior(b):
            return build_behavior(
                {rename(s) for s in b.states}, rename(b.initial), b.labels,
                [(rename(t.source), t.label, rename(t.target)) for t in b.transitions],
                {rename(s) for s in b.finals},
            )

        entries = {
            rename(state): [Path(tuple(rename(s) for s in p.states), p.labels)
                            for p in paths]
            for state, paths in coupled.mapping.entries
        }
        assignments = {
            a.name: ({rename(s) for s in a.control_states},
                     {rename(s) for s in a.preventive_states})
            for a in coupled.approaches.approaches
        }
        renamed = build_coupled_model(
            build_preventive_behavior(rename_behavior(coupled.preventive.base)),
            build_control_behavior(rename_behavior(coupled.control.base)),
            mapping_process(entries, {rename(s) for s in coupled.mapping.exempt}),
            approach_partition(assignments),
        )
        assert check_approach_alignment(renamed).passed == check_approach_alignment(coupled).passed
        assert check_mapping(renamed).passed == check_mapping(coupled).passed
        assert check_synchronization(renamed).passed == check_synchronization(coupled).passed


class TestSynchronization:
    def test_bundled_passes(self, coupled):
        report = check_synchronization(coupled)
        assert report.passed
        assert any(f.code == "control-paths" and "2" in f.detail for f in report.findings)

    def test_fragments_stitch_through_done(self, coupled):
        # Recognition's fragment ends at CheckCleaningOperations; Done's starts
        # at DeliverSafeStatus; the delete transition links them.
        assert Transition("CheckCleaningOperations", "delete", "DeliverSafeStatus") \
            in coupled.preventive.base.transition_set

    def test_remapped_done_breaks_stitching(self, coupled):
        entries = mapping_dict(coupled.mapping)
        entries["Done"] = [Path(("RealTimeProtection",))]
        model = rebuild(coupled, mapping=mapping_process(entries, coupled.mapping.exempt))
        report = check_synchronization(model)
        assert not report.passed
        gap = [f for f in report.findings if f.code == "sync-gap"]
        assert gap
        assert gap[0].subject == "Done"
        assert "CheckCleaningOperations" in gap[0].detail
        assert "RealTimeProtection" in gap[0].detail

    def test_monotone_under_added_preventive_transitions(self, coupled):
        base = coupled.preventive.base
        extra = build_behavior(
            base.states, base.initial, base.labels | {"shortcut"},
            list(base.transitions)
            + [("DeliverUnsafeStatus", "shortcut", "SystemProtection")],
            base.finals,
        )
        model = rebuild(coupled, preventive=build_preventive_behavior(extra))
        assert check_synchronization(coupled).passed
        assert check_synchronization(model).passed

    def test_no_final_states_warns(self, coupled):
        base = coupled.control.base
        no_finals = build_behavior(base.states, base.initial, base.labels,
                                   base.transitions, frozenset())
        model = rebuild(coupled, control=build_control_behavior(no_finals))
        report = check_synchronization(model)
        assert report.passed
        assert any(f.code == "no-final-states" for f in report.findings)


class TestAnnotations:
    def test_annotation_must_match_transition(self, coupled):
        from avmkit.coupled import TransitionAnnotation

        with pytest.raises(ModelValidationError) as err:
            build_control_behavior(
                coupled.control.base,
                annotations=[TransitionAnnotation("NotActivated", "bogus", "Activated",
                                                  "activate", "Protection")],
            )
        assert any(f.code == "unknown-transition" for f in err.value.findings)

    def test_annotation_approach_tag_checked(self, coupled):
        from avmkit.coupled import TransitionAnnotation

        with pytest.raises(ModelValidationError) as err:
            build_control_behavior(
                coupled.control.base,
                annotations=[TransitionAnnotation("NotActivated", "activate", "Activated",
                                                  "activate", "Cleanup")],
            )
        assert any(f.code == "unknown-approach-tag" for f in err.value.findings)

    def test_events_default_to_labels(self, coupled):
        assert coupled.control.events == coupled.control.base.labels


class TestApproachPartition:
    def test_always_four_entries(self, coupled):
        assert tuple(a.name for a in coupled.approaches.approaches) == APPROACH_NAMES

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            approach_partition({"Cleanup": ((), ())})

    def test_states_by_side(self, coupled):
        control_side = coupled.approaches.states_by_side("control")
        assert control_side["Protection"] == frozenset({"NotActivated", "Activated"})
        with pytest.raises(ValueError):
            coupled.approaches.states_by_side("sideways")


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.randoms(use_true_random=False))
def test_random_models_mapping_check_matches_revalidation(seed, rng):
    base_rng = Random(seed)
    preventive = random_behavior(base_rng, max_states=5)
    control = random_behavior(base_rng, max_states=4)

    entries = {}
    exempt = set()
    preventive_states = sorted(preventive.states)
    for state in sorted(control.states):
        if rng.random() < 0.3:
            exempt.add(state)
            continue
        # random single-state fragments, occasionally nonsense two-step paths
        if rng.random() < 0.7:
            entries[state] = [Path((rng.choice(preventive_states),))]
        else:
            a, b = rng.choice(preventive_states), rng.choice(preventive_states)
            entries[state] = [Path((a, b), (rng.choice(sorted(preventive.labels)),))]
    model = build_coupled_model(
        build_preventive_behavior(preventive),
        build_control_behavior(control),
        mapping_process(entries, exempt),
        approach_partition({}),
    )
    report = check_mapping(model)
    expected = all(
        is_valid_path(preventive, path) for paths in entries.values() for path in paths
    )
    assert report.passed == expected
