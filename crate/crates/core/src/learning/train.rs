use std::time::Instant;

use super::atoms::{update_block, AtomStep};
use super::codes::solve_class_block;
use super::init::check_layout;
use super::{init_codes, init_dictionary, objective, CodeMatrix, Hyperparameters, ObjectiveBreakdown};
use crate::dataset::LabeledDataset;
use crate::dictionary::{LabelLayout, StructuredDictionary};
use crate::error::{Error, Result};
use crate::laplacian::BlockLaplacian;

/// One line of the training log. Iteration 0 is the state right after
/// initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: ObjectiveBreakdown,
    /// Wall-clock time since training started, initialization included.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct TrainState {
    pub dictionary: StructuredDictionary,
    pub codes: CodeMatrix,
    /// Objective after initialization, then after every outer iteration.
    pub history: Vec<ObjectiveBreakdown>,
    pub log: Vec<IterationRecord>,
    pub iterations_run: usize,
    pub converged: bool,
    pub dead_atoms_replaced: usize,
}

/// Hooks into the training loop. Phase and atom callbacks cost an extra
/// objective evaluation per phase, so they only fire when
/// [`TrainObserver::track_phases`] returns true.
pub trait TrainObserver {
    fn on_iteration(&mut self, _record: &IterationRecord) {}

    fn track_phases(&self) -> bool {
        false
    }

    fn on_code_phase(
        &mut self,
        _iteration: usize,
        _before: &ObjectiveBreakdown,
        _after: &ObjectiveBreakdown,
    ) {
    }

    fn on_atom_step(&mut self, _iteration: usize, _step: &AtomStep) {}
}

impl TrainObserver for () {}

pub fn train(
    train: &LabeledDataset,
    layout: &LabelLayout,
    hp: &Hyperparameters,
) -> Result<TrainState> {
    train_with_observer(train, layout, hp, &mut ())
}

pub fn train_with_observer(
    train: &LabeledDataset,
    layout: &LabelLayout,
    hp: &Hyperparameters,
    observer: &mut dyn TrainObserver,
) -> Result<TrainState> {
    let start = Instant::now();
    hp.validate()?;
    check_layout(train, layout)?;

    let y = train.features();
    let laplacian = BlockLaplacian::from_class_sizes(train.class_sizes())?;
    let selectors = (1..=layout.num_classes())
        .map(|c| layout.suppression_selector(c))
        .collect::<Result<Vec<_>>>()?;
    let ranges = train.class_ranges();
    let tracking = observer.track_phases();

    let mut dictionary = init_dictionary(train, layout, hp)?;
    let mut codes = init_codes(train, &dictionary, hp.beta)?;
    let evaluate = |d: &StructuredDictionary, x: &CodeMatrix, iteration: usize| {
        let j = objective(y, d, x, layout, &laplacian, hp)?;
        if !j.is_finite() {
            return Err(Error::NonFiniteObjective {
                iteration,
                detail: format!("{j:?}"),
            });
        }
        Ok(j)
    };

    let mut current = evaluate(&dictionary, &codes, 0)?;
    let mut history = vec![current];
    let first = IterationRecord {
        iteration: 0,
        objective: current,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    observer.on_iteration(&first);
    let mut log = vec![first];
    let mut converged = false;
    let mut iterations_run = 0;
    let mut dead_atoms_replaced = 0;

    for iteration in 1..=hp.max_iters {
        // codes, class by class
        let d = dictionary.atoms();
        let gram = d.tr_mul(d);
        for c in 1..=layout.num_classes() {
            let dty = d.tr_mul(&train.class_block(c));
            let mut xc = codes.block(c).clone_owned();
            solve_class_block(&gram, &dty, &selectors[c - 1], &laplacian.blocks()[c - 1], &mut xc, hp)?;
            codes.block_mut(c).copy_from(&xc);
        }
        if tracking {
            let after = evaluate(&dictionary, &codes, iteration)?;
            observer.on_code_phase(iteration, &current, &after);
        }

        // atoms, shared block first
        let mut residual = y - dictionary.atoms() * codes.values();
        for block in 0..=layout.num_classes() {
            let outcome = update_block(
                y,
                &ranges,
                &mut residual,
                codes.values_mut(),
                dictionary.atoms_mut(),
                layout,
                block,
                hp,
                tracking,
            );
            dead_atoms_replaced += outcome.dead_atoms.len();
            for step in &outcome.steps {
                observer.on_atom_step(iteration, step);
            }
        }

        let next = evaluate(&dictionary, &codes, iteration)?;
        let record = IterationRecord {
            iteration,
            objective: next,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        observer.on_iteration(&record);
        log.push(record);
        history.push(next);
        iterations_run = iteration;

        let prev = current.total;
        current = next;
        let rel = if prev == 0.0 {
            0.0
        } else {
            (next.total - prev).abs() / prev.abs()
        };
        if rel < hp.rel_tol {
            converged = true;
            break;
        }
    }

    Ok(TrainState {
        dictionary,
        codes,
        history,
        log,
        iterations_run,
        converged,
        dead_atoms_replaced,
    })
}
