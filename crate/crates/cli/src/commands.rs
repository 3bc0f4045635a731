use std::fmt;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DMatrix;
use structdict::classify::{
    cross_validate, default_lambda_grid, evaluate, grid_search, ClassifierKind, Evaluation,
    GridPoint, Model, SelectionReport,
};
use structdict::dataset::{
    load_binary, load_dataset, load_features_csv, split, DatasetFormat, LabeledDataset, SplitSpec,
};
use structdict::dictionary::LabelLayout;
use structdict::inspect::inspect;
use structdict::learning::{train, Hyperparameters, TrainState};
use structdict::model_io::{load_model, save_model};

use crate::args::{
    BenchArgs, ClassifierChoice, CrossvalArgs, EvalArgs, InspectArgs, LearnArgs, PredictArgs,
    TrainArgs,
};
use crate::report::{Cell, Report};

#[derive(Debug)]
pub enum CliError {
    /// Flags that parse but do not make sense together; exit code 2.
    Usage(String),
    Run(structdict::Error),
    Io(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<structdict::Error> for CliError {
    fn from(e: structdict::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load_labeled(path: &Path) -> Result<LabeledDataset> {
    Ok(load_dataset(path, DatasetFormat::from_path(path))?)
}

/// Features in file order plus labels when the file has them.
fn load_table(path: &Path) -> Result<(DMatrix<f64>, Option<Vec<usize>>)> {
    match DatasetFormat::from_path(path) {
        DatasetFormat::Csv => {
            let t = load_features_csv(path)?;
            Ok((t.features, t.labels))
        }
        DatasetFormat::Binary => {
            let ds = load_binary(path)?;
            let mut features = DMatrix::zeros(ds.dim(), ds.len());
            let mut labels = vec![0; ds.len()];
            for (pos, &orig) in ds.source_index().iter().enumerate() {
                features.set_column(orig, &ds.features().column(pos));
                labels[orig] = ds.labels()[pos];
            }
            Ok((features, Some(labels)))
        }
    }
}

fn layout_for(learn: &LearnArgs, classes: usize, smallest_class: usize) -> Result<LabelLayout> {
    let per_class = learn
        .atoms_per_class
        .map_or(smallest_class.saturating_sub(1).max(1), |k| k as usize);
    Ok(LabelLayout::uniform(classes, per_class, learn.shared)?)
}

fn smallest_class(ds: &LabeledDataset) -> usize {
    ds.class_sizes().iter().copied().min().unwrap_or(0)
}

struct Trained {
    state: TrainState,
    model: Model,
    layout: LabelLayout,
    selection: Option<SelectionReport>,
}

fn fit(
    data: &LabeledDataset,
    learn: &LearnArgs,
    hp: &Hyperparameters,
    choice: ClassifierChoice,
    folds: usize,
) -> Result<Trained> {
    let layout = layout_for(learn, data.num_classes(), smallest_class(data))?;
    let selection = match choice.fixed() {
        Some(_) => None,
        None => Some(cross_validate(data, &fold_layout(learn, data, folds)?, hp, folds)?),
    };
    let kind = choice
        .fixed()
        .or(selection.as_ref().map(|s| s.selected))
        .unwrap_or_default();
    let state = train(data, &layout, hp)?;
    let model = Model::from_training(&state, hp, kind)?;
    Ok(Trained {
        state,
        model,
        layout,
        selection,
    })
}

/// Layout whose default atom count fits the smallest training fold.
fn fold_layout(learn: &LearnArgs, data: &LabeledDataset, folds: usize) -> Result<LabelLayout> {
    let smallest = data
        .class_sizes()
        .iter()
        .map(|&n| n - n.div_ceil(folds.max(1)))
        .min()
        .unwrap_or(0);
    layout_for(learn, data.num_classes(), smallest)
}

fn log_rows(state: &TrainState) -> Vec<Vec<Cell>> {
    state
        .log
        .iter()
        .map(|r| {
            let j = &r.objective;
            vec![
                r.iteration.into(),
                j.reconstruction.into(),
                j.ridge.into(),
                j.suppression.into(),
                j.group.into(),
                j.total.into(),
                r.elapsed_ms.into(),
            ]
        })
        .collect()
}

const LOG_COLUMNS: [&str; 7] = [
    "iteration",
    "reconstruction",
    "ridge",
    "suppression",
    "group",
    "total",
    "elapsed_ms",
];

pub fn run_train(args: &TrainArgs) -> Result<()> {
    let data = load_labeled(&args.data)?;
    let hp = args.learn.hyperparameters(args.output.seed);
    let fitted = fit(&data, &args.learn, &hp, args.classifier, args.folds)?;
    save_model(&fitted.model, &args.model)?;

    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "train", hp.seed)?;
    report.table("log", &LOG_COLUMNS, log_rows(&fitted.state))?;
    let state = &fitted.state;
    let mut summary = vec![
        ("model", Cell::from(args.model.display().to_string())),
        ("samples", data.len().into()),
        ("classes", data.num_classes().into()),
        ("dim", data.dim().into()),
        ("atoms", fitted.layout.num_atoms().into()),
        ("atoms_per_class", fitted.layout.particular_counts()[0].into()),
        ("shared", fitted.layout.shared_count().into()),
        ("iterations", state.iterations_run.into()),
        ("converged", state.converged.into()),
        ("dead_atoms_replaced", state.dead_atoms_replaced.into()),
        ("objective", state.history.last().map(|j| j.total).into()),
        ("classifier", fitted.model.classifier().to_string().into()),
    ];
    if let Some(s) = &fitted.selection {
        summary.push(("cv_gcc", s.gcc_mean.into()));
        summary.push(("cv_lcc", s.lcc_mean.into()));
    }
    report.fields("summary", summary)?;
    Ok(report.finish()?)
}

fn check_dim(model: &Model, dim: usize) -> Result<()> {
    let expected = model.dictionary().dim();
    if dim != expected {
        return Err(CliError::Run(structdict::Error::ShapeMismatch {
            what: "feature dimension M",
            expected,
            found: dim,
        }));
    }
    Ok(())
}

pub fn run_predict(args: &PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let (features, labels) = load_table(&args.data)?;
    check_dim(&model, features.nrows())?;
    let kind = args
        .classifier
        .and_then(ClassifierChoice::fixed)
        .unwrap_or(model.classifier());
    let predictions = model.predict(&features, kind)?;

    let classes = model.num_classes();
    let score_names: Vec<String> = (1..=classes).map(|c| format!("score_{c}")).collect();
    let mut columns = vec!["sample_index"];
    if labels.is_some() {
        columns.push("true_label");
    }
    columns.push("predicted_label");
    columns.extend(score_names.iter().map(String::as_str));
    let rows = predictions
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut row = vec![Cell::from(j)];
            if let Some(l) = &labels {
                row.push(l[j].into());
            }
            row.push(p.label.into());
            row.extend(p.scores.iter().map(|&s| Cell::from(s)));
            row
        })
        .collect();
    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "predict", args.output.seed)?;
    report.table("predictions", &columns, rows)?;
    Ok(report.finish()?)
}

/// Runs `f(0..n)` on up to `jobs` threads; results come back in index order.
fn run_indexed<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                *slots[i].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every index is filled"))
        .collect()
}

struct EvalRun {
    seed: u64,
    kind: ClassifierKind,
    eval: Evaluation,
}

pub fn run_eval(args: &EvalArgs) -> Result<()> {
    let seed = args.output.seed;
    let runs: Vec<EvalRun> = if let Some(model_path) = &args.model {
        let model = load_model(model_path)?;
        let test_path = args.test.as_ref().or(args.data.as_ref()).ok_or_else(|| {
            CliError::Usage("eval with --model needs --test".into())
        })?;
        let test = load_labeled(test_path)?;
        check_dim(&model, test.dim())?;
        let kind = args.classifier.fixed().unwrap_or(model.classifier());
        vec![EvalRun {
            seed,
            kind,
            eval: evaluate(&model, &test, kind)?,
        }]
    } else {
        let data = load_labeled(args.data.as_ref().expect("clap requires --data without --model"))?;
        let test = args.test.as_deref().map(load_labeled).transpose()?;
        let mode = args.split.mode();
        if test.is_none() && mode.is_none() {
            return Err(CliError::Usage(
                "eval without --model needs --test or one of --split-per-class, --split-fraction".into(),
            ));
        }
        if test.is_some() && mode.is_some() {
            return Err(CliError::Usage("--test and --split-* are mutually exclusive".into()));
        }
        if let Some(t) = &test {
            if t.dim() != data.dim() {
                return Err(CliError::Run(structdict::Error::ShapeMismatch {
                    what: "feature dimension M",
                    expected: data.dim(),
                    found: t.dim(),
                }));
            }
        }
        let one = |i: usize| -> Result<EvalRun> {
            let run_seed = seed + i as u64;
            let (train_set, test_set) = match (&test, mode) {
                (Some(t), _) => (data.clone(), t.clone()),
                (None, Some(m)) => {
                    let p = split(&data, &SplitSpec::new(m, run_seed))?.remove(0);
                    (p.train, p.test)
                }
                (None, None) => unreachable!(),
            };
            let hp = args.learn.hyperparameters(run_seed);
            let fitted = fit(&train_set, &args.learn, &hp, args.classifier, args.folds)?;
            let kind = fitted.model.classifier();
            Ok(EvalRun {
                seed: run_seed,
                kind,
                eval: evaluate(&fitted.model, &test_set, kind)?,
            })
        };
        run_indexed(args.repeats as usize, args.jobs as usize, one)
            .into_iter()
            .collect::<Result<_>>()?
    };
    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "eval", seed)?;
    write_eval(&mut report, &runs)?;
    Ok(report.finish()?)
}

fn write_eval(report: &mut Report, runs: &[EvalRun]) -> Result<()> {
    let classes = runs[0].eval.confusion.len();
    let accuracies: Vec<f64> = runs.iter().map(|r| r.eval.accuracy).collect();
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std = if runs.len() > 1 {
        (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };

    if runs.len() > 1 {
        let rows = runs
            .iter()
            .enumerate()
            .map(|(i, r)| vec![(i + 1).into(), r.seed.into(), r.kind.to_string().into(), r.eval.accuracy.into()])
            .collect();
        report.table("runs", &["run", "seed", "classifier", "accuracy"], rows)?;
    }

    // per-class accuracy and confusion pooled over runs
    let mut confusion = vec![vec![0usize; classes]; classes];
    for r in runs {
        for (i, row) in r.eval.confusion.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                confusion[i][j] += v;
            }
        }
    }
    let mut summary = vec![
        ("runs", Cell::from(runs.len())),
        ("classifier", runs[0].kind.to_string().into()),
    ];
    if runs.len() > 1 {
        summary.push(("accuracy_mean", mean.into()));
        summary.push(("accuracy_std", std.into()));
        summary.push(("accuracy", format!("{:.4} ± {:.4}", mean, std).into()));
    } else {
        summary.push(("accuracy", format!("{mean:.4}").into()));
    }
    report.fields("summary", summary)?;

    let per_class = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            let acc = (total > 0).then(|| row[i] as f64 / total as f64);
            vec![(i + 1).into(), total.into(), acc.into()]
        })
        .collect();
    report.table("per_class", &["class", "samples", "accuracy"], per_class)?;

    let names: Vec<String> = (1..=classes).map(|c| format!("pred_{c}")).collect();
    let mut columns = vec!["true"];
    columns.extend(names.iter().map(String::as_str));
    let rows = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut cells = vec![Cell::from(i + 1)];
            cells.extend(row.iter().map(|&v| Cell::from(v)));
            cells
        })
        .collect();
    report.table("confusion", &columns, rows)?;
    Ok(())
}

pub fn run_crossval(args: &CrossvalArgs) -> Result<()> {
    let data = load_labeled(&args.data)?;
    let base = args.learn.hyperparameters(args.output.seed);
    let or = |v: &Vec<f64>, d: Vec<f64>| if v.is_empty() { d } else { v.clone() };
    let grid = GridPoint::product(
        &or(&args.grid_beta, vec![base.beta]),
        &or(&args.grid_lambda, default_lambda_grid()),
        &or(&args.grid_gamma, vec![base.gamma]),
    );
    let layout = fold_layout(&args.learn, &data, args.folds)?;
    let search = grid_search(&data, &layout, &base, &grid, args.folds)?;

    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "crossval", base.seed)?;
    let rows = search
        .results
        .iter()
        .enumerate()
        .map(|(i, (p, r))| {
            vec![
                (i + 1).into(),
                p.beta.into(),
                p.lambda.into(),
                p.gamma.into(),
                r.gcc_mean.into(),
                r.lcc_mean.into(),
                r.selected.to_string().into(),
            ]
        })
        .collect();
    report.table(
        "grid",
        &["point", "beta", "lambda", "gamma", "gcc_accuracy", "lcc_accuracy", "selected"],
        rows,
    )?;
    let folds = search
        .results
        .iter()
        .enumerate()
        .flat_map(|(i, (_, r))| {
            r.folds
                .iter()
                .enumerate()
                .map(move |(f, (g, l))| vec![(i + 1).into(), (f + 1).into(), (*g).into(), (*l).into()])
        })
        .collect();
    report.table("folds", &["point", "fold", "gcc_accuracy", "lcc_accuracy"], folds)?;
    let best = search.best_point();
    report.fields(
        "selected",
        vec![
            ("point", (search.best + 1).into()),
            ("beta", best.beta.into()),
            ("lambda", best.lambda.into()),
            ("gamma", best.gamma.into()),
            ("classifier", search.best_classifier().to_string().into()),
            ("accuracy", search.results[search.best].1.best_accuracy().into()),
            ("folds", args.folds.into()),
            ("atoms_per_class", layout.particular_counts()[0].into()),
            ("shared", layout.shared_count().into()),
        ],
    )?;
    Ok(report.finish()?)
}

pub fn run_inspect(args: &InspectArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let data = load_labeled(&args.data)?;
    check_dim(&model, data.dim())?;
    let result = inspect(&model, &data)?;
    let layout = model.dictionary().layout();

    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "inspect", args.output.seed)?;
    let ratios = result
        .block_ratios
        .iter()
        .enumerate()
        .map(|(c, &r)| vec![(c + 1).into(), r.into()])
        .collect();
    report.table("block_ratios", &["class", "block_ratio"], ratios)?;
    let profiles = result
        .profiles
        .iter()
        .enumerate()
        .flat_map(|(c, profile)| {
            profile
                .iter()
                .enumerate()
                .map(move |(k, &v)| vec![(c + 1).into(), k.into(), layout.owner(k).into(), v.into()])
        })
        .collect();
    report.table("profiles", &["class", "atom", "owner", "mean_abs_code"], profiles)?;
    Ok(report.finish()?)
}

pub fn run_bench(args: &BenchArgs) -> Result<()> {
    let data = load_labeled(&args.data)?;
    let queries = match &args.test {
        Some(path) => load_table(path)?.0,
        None => data.features().clone(),
    };
    if queries.nrows() != data.dim() {
        return Err(CliError::Run(structdict::Error::ShapeMismatch {
            what: "feature dimension M",
            expected: data.dim(),
            found: queries.nrows(),
        }));
    }
    if queries.ncols() == 0 || args.queries == 0 {
        return Err(CliError::Usage("bench needs at least one query".into()));
    }
    let hp = args.learn.hyperparameters(args.output.seed);
    let layout = layout_for(&args.learn, data.num_classes(), smallest_class(&data))?;

    let start = Instant::now();
    let state = train(&data, &layout, &hp)?;
    let train_ms = start.elapsed().as_secs_f64() * 1e3;
    let model = Model::from_training(&state, &hp, ClassifierKind::Gcc)?;
    if let Some(path) = &args.model {
        save_model(&model, path)?;
    }

    let start = Instant::now();
    model.prepare()?;
    let prepare_ms = start.elapsed().as_secs_f64() * 1e3;
    let time = |kind| -> Result<f64> {
        let start = Instant::now();
        for i in 0..args.queries {
            model.classify_with(kind, queries.column(i % queries.ncols()))?;
        }
        Ok(start.elapsed().as_secs_f64() * 1e3 / args.queries as f64)
    };
    let gcc_ms = time(ClassifierKind::Gcc)?;
    let lcc_ms = time(ClassifierKind::Lcc)?;

    let mut report = Report::open(args.output.format, args.output.out.as_deref(), "bench", hp.seed)?;
    report.table("log", &LOG_COLUMNS, log_rows(&state))?;
    report.fields(
        "timing",
        vec![
            ("samples", data.len().into()),
            ("dim", data.dim().into()),
            ("atoms", layout.num_atoms().into()),
            ("iterations", state.iterations_run.into()),
            ("train_ms", train_ms.into()),
            ("prepare_ms", prepare_ms.into()),
            ("queries", args.queries.into()),
            ("gcc_ms_per_query", gcc_ms.into()),
            ("lcc_ms_per_query", lcc_ms.into()),
        ],
    )?;
    Ok(report.finish()?)
}
