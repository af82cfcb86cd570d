use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde_json::{json, Value};

use lambda_sharp::gen::{difftest_source, handler_corpus, seed_from_env, DiffResult};

use crate::{InputError, Res};

const GEN_DEPTH: usize = 5;

fn lam_files(dir: &Path) -> Result<Vec<PathBuf>, InputError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| InputError(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lam"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every `.lam` file of `dir` under both exception encodings, spread
/// over `jobs` worker threads. Results come back in file order.
pub fn difftest(dir: &Path, generate: Option<usize>, seed: Option<u64>, fuel: usize, jobs: usize) -> Res {
    let t0 = Instant::now();
    let seed = seed.unwrap_or_else(seed_from_env);
    if let Some(n) = generate {
        std::fs::create_dir_all(dir)?;
        for (i, p) in handler_corpus(seed, n, GEN_DEPTH).iter().enumerate() {
            std::fs::write(dir.join(format!("gen_{i:04}.lam")), p.to_source() + "\n")?;
        }
    }
    let files = lam_files(dir)?;
    let sources = files
        .iter()
        .map(|f| std::fs::read_to_string(f).map_err(|e| InputError(format!("{}: {e}", f.display()))))
        .collect::<Result<Vec<_>, _>>()?;

    let next = AtomicUsize::new(0);
    let mut results: Vec<Option<Result<DiffResult, String>>> = vec![None; files.len()];
    let chunks: Vec<Vec<(usize, Result<DiffResult, String>)>> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs.max(1))
            .map(|_| {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= sources.len() {
                            break mine;
                        }
                        mine.push((i, difftest_source(&sources[i], fuel).map_err(|e| e.to_string())));
                    }
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
    });
    for (i, r) in chunks.into_iter().flatten() {
        results[i] = Some(r);
    }

    let mut agree = 0;
    let mut rows = Vec::new();
    let mut bad_input = Vec::new();
    for (f, r) in files.iter().zip(results) {
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        match r.expect("every file is processed") {
            Ok(d) => {
                let ok = d.agrees();
                agree += usize::from(ok);
                rows.push(json!({"file": name, "handle": d.plain.to_string(),
                                 "handle_p": d.prompted.to_string(), "agree": ok}));
            }
            Err(e) => bad_input.push(json!({"file": name, "error": e})),
        }
    }
    let total = rows.len();
    let code = if !bad_input.is_empty() {
        3
    } else if agree == total {
        0
    } else {
        1
    };
    let disagreements: Vec<&Value> = rows.iter().filter(|r| r["agree"] == json!(false)).collect();
    Ok((
        json!({
            "mode": "difftest",
            "programs": total,
            "agree": agree,
            "disagreements": disagreements,
            "unreadable": bad_input,
            "results": rows,
            "seed": seed,
            "fuel": fuel,
            "elapsed_ms": t0.elapsed().as_secs_f64() * 1000.0,
        }),
        code,
    ))
}
