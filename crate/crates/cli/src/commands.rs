use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use mhcs_core::group::SuiteParams;
use mhcs_core::metrics::{run_benchmark, BenchConfig};
use mhcs_core::mhcs::{
    close_slot_and_batch_verify, ms_init, DataCenter, ManagementServer, Participant, PublicKeyWire,
    SecretKeyWire, Submission, TimeSlot,
};
use mhcs_core::scenario::{run_scenario, ScenarioConfig};
use mhcs_core::{
    clas::AuthorityPublicKey, derive_rng, BilinearSuite, Bls12, PairingBackend, TypeA,
};

use crate::fail::{rejected, usage, CliResult, EXIT_REJECTED};
use crate::store::{self, write_atomic, Store};
use crate::{Cli, Command};

/// Calls `$f::<Backend>(args..)` for the backend named by `$name`.
macro_rules! dispatch {
    ($name:expr, $f:ident($($arg:expr),*)) => {{
        let name: &str = $name;
        if name == Bls12::NAME {
            $f::<Bls12>($($arg),*)
        } else if name == TypeA::NAME {
            $f::<TypeA>($($arg),*)
        } else {
            Err(usage(format!("unknown backend {name:?} in suite.json")))
        }
    }};
}

fn backend_for_level(level: u32) -> CliResult<&'static str> {
    match level {
        l if l == Bls12::SECURITY_BITS => Ok(Bls12::NAME),
        l if l == TypeA::SECURITY_BITS => Ok(TypeA::NAME),
        _ => Err(mhcs_core::Error::UnsupportedParameter(level, mhcs_core::SUPPORTED_LEVELS).into()),
    }
}

struct Ctx {
    store: Store,
    seed: Option<u64>,
}

impl Ctx {
    /// Seeded streams are split per command and argument so reruns repeat exactly.
    fn rng(&self, label: &str) -> ChaCha20Rng {
        match self.seed {
            Some(seed) => derive_rng(seed, format!("cli/{label}").as_bytes()),
            None => ChaCha20Rng::from_entropy(),
        }
    }

    fn backend(&self) -> CliResult<String> {
        let params: SuiteParams = parse_json(&self.store.read_rel(store::SUITE)?, store::SUITE)?;
        Ok(params.backend)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| usage(format!("malformed {what}: {e}")))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn run(cli: Cli) -> CliResult<u8> {
    let ctx = Ctx {
        store: Store::new(&cli.dir),
        seed: cli.seed,
    };
    match cli.cmd {
        Command::Setup { level, out, force } => {
            let ctx = Ctx {
                store: Store::new(out.unwrap_or(cli.dir)),
                ..ctx
            };
            dispatch!(backend_for_level(level)?, setup(&ctx, level, force))
        }
        Command::Register { id } => dispatch!(&ctx.backend()?, register(&ctx, &id)),
        Command::Sign {
            id,
            message,
            time,
            out,
        } => {
            dispatch!(
                &ctx.backend()?,
                sign(&ctx, &id, &message, time, out.as_deref())
            )
        }
        Command::Submit {
            slot,
            input,
            start,
            duration,
        } => dispatch!(
            &ctx.backend()?,
            submit(&ctx, slot, input.as_deref(), start, duration)
        ),
        Command::Aggregate { slot } => dispatch!(&ctx.backend()?, aggregate(&ctx, slot)),
        Command::BatchVerify { slot } => dispatch!(&ctx.backend()?, batch_verify(&ctx, slot)),
        Command::Trace { index } => dispatch!(&ctx.backend()?, trace(&ctx, &index)),
        Command::Simulate {
            config,
            participants,
            duration,
            message_bits,
            tamper,
            level,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    parse_json::<ScenarioConfig>(&ctx.store.read(path)?, "scenario config")?
                }
                None => ScenarioConfig::new(
                    participants.ok_or_else(|| usage("need --config or --participants"))?,
                ),
            };
            if let Some(n) = participants {
                cfg.n_participants = n;
            }
            if let Some(d) = duration {
                cfg.slot_duration_s = d;
            }
            if let Some(b) = message_bits {
                cfg.message_bits = b;
            }
            if let Some(t) = tamper {
                cfg.tamper = Some(t.parse()?);
            }
            if ctx.seed.is_some() {
                cfg.seed = ctx.seed;
            }
            dispatch!(backend_for_level(level)?, simulate(&cfg, out.as_deref()))
        }
        Command::Bench {
            participants,
            csv,
            json,
            no_timings,
            workers,
            message_bits,
            level,
        } => {
            let backend = match level {
                Some(l) => backend_for_level(l)?.to_string(),
                None if ctx.store.exists(store::SUITE) => ctx.backend()?,
                None => Bls12::NAME.to_string(),
            };
            if participants.is_empty() || participants.contains(&0) {
                return Err(mhcs_core::Error::NonPositiveN.into());
            }
            let cfg = BenchConfig {
                n_values: participants,
                seed: ctx.seed.unwrap_or_else(rand::random),
                workers: workers.max(1),
                message_bits,
            };
            let out = BenchOut {
                csv: csv.as_deref(),
                json: json.as_deref(),
                no_timings,
            };
            dispatch!(&backend, bench(&cfg, &out))
        }
    }
}

fn load_suite<B: PairingBackend>(ctx: &Ctx) -> CliResult<BilinearSuite<B>> {
    let params: SuiteParams = parse_json(&ctx.store.read_rel(store::SUITE)?, store::SUITE)?;
    if !params.matches::<B>() {
        return Err(usage("suite.json does not match the built-in parameters"));
    }
    Ok(BilinearSuite::new())
}

fn load_public<B: PairingBackend>(
    ctx: &Ctx,
    suite: &BilinearSuite<B>,
    file: &str,
) -> CliResult<AuthorityPublicKey<B>> {
    let wire: PublicKeyWire = parse_json(&ctx.store.read_rel(file)?, file)?;
    Ok(wire.to_key(suite)?)
}

fn load_ms<B: PairingBackend>(
    ctx: &Ctx,
    suite: &BilinearSuite<B>,
) -> CliResult<ManagementServer<B>> {
    let wire: SecretKeyWire = parse_json(&ctx.store.read_rel(store::MS_SECRET)?, store::MS_SECRET)?;
    let keys = wire.to_keys(suite)?;
    let ledger = if ctx.store.exists(store::LEDGER) {
        ctx.store.read_rel(store::LEDGER)?
    } else {
        String::new()
    };
    Ok(ManagementServer::from_records(
        keys,
        ManagementServer::<B>::parse_ledger(&ledger)?,
    )?)
}

fn load_dc<B: PairingBackend>(ctx: &Ctx, suite: &BilinearSuite<B>) -> CliResult<DataCenter<B>> {
    let wire: SecretKeyWire = parse_json(&ctx.store.read_rel(store::DC_SECRET)?, store::DC_SECRET)?;
    Ok(DataCenter::new(wire.to_keys(suite)?))
}

fn load_slot<B: PairingBackend>(
    ctx: &Ctx,
    suite: &BilinearSuite<B>,
    slot: u64,
) -> CliResult<TimeSlot<B>> {
    Ok(TimeSlot::from_json(
        suite,
        &ctx.store.read(&ctx.store.slot(slot))?,
    )?)
}

fn setup<B: PairingBackend>(ctx: &Ctx, level: u32, force: bool) -> CliResult<u8> {
    let s = &ctx.store;
    if !force {
        for f in [store::SUITE, store::MS_SECRET, store::DC_SECRET] {
            if s.exists(f) {
                return Err(usage(format!(
                    "{} already exists; pass --force to overwrite",
                    s.path(f).display()
                )));
            }
        }
    }
    let mut rng = ctx.rng("setup");
    let (suite, ms, dc) = ms_init::<B, _>(level, &mut rng)?;
    write_atomic(
        &s.path(store::SUITE),
        pretty(&suite.params()).as_bytes(),
        false,
    )?;
    for (public, secret, keys) in [
        (store::MS_PUBLIC, store::MS_SECRET, &ms),
        (store::DC_PUBLIC, store::DC_SECRET, &dc),
    ] {
        write_atomic(
            &s.path(public),
            pretty(&PublicKeyWire::from_key(keys.public())).as_bytes(),
            false,
        )?;
        write_atomic(
            &s.path(secret),
            pretty(&SecretKeyWire::from_keys(keys)).as_bytes(),
            true,
        )?;
    }
    // a fresh ceremony invalidates everything issued under the old keys
    write_atomic(&s.path(store::LEDGER), b"", false)?;
    println!(
        "{}",
        pretty(&serde_json::json!({
            "backend": B::NAME,
            "security_level": level,
            "dir": s.path("").display().to_string(),
        }))
    );
    Ok(0)
}

fn register<B: PairingBackend>(ctx: &Ctx, id: &str) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let mut ms = load_ms(ctx, &suite)?;
    let mut rng = ctx.rng(&format!("register/{id}"));
    let mut p = Participant::new(&suite, id.as_bytes().to_vec(), &mut rng);
    let grant = ms.register(&suite, p.keys().id(), p.keys().q1(), &mut rng)?;
    p.complete_registration(&suite, &ms.public().clone(), grant)?;
    write_atomic(
        &ctx.store.participant(id.as_bytes()),
        p.to_json().as_bytes(),
        true,
    )?;
    write_atomic(
        &ctx.store.path(store::LEDGER),
        ms.ledger_jsonl().as_bytes(),
        false,
    )?;
    println!(
        "{}",
        pretty(&serde_json::json!({ "id": id, "registered": true }))
    );
    Ok(0)
}

fn sign<B: PairingBackend>(
    ctx: &Ctx,
    id: &str,
    message: &Path,
    time: Option<u64>,
    out: Option<&Path>,
) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let ms_pk = load_public(ctx, &suite, store::MS_PUBLIC)?;
    let dc_pk = load_public(ctx, &suite, store::DC_PUBLIC)?;
    let p = Participant::from_json(
        &suite,
        &ms_pk,
        &ctx.store.read(&ctx.store.participant(id.as_bytes()))?,
    )?;
    let m = std::fs::read(message).with_context(|| format!("reading {}", message.display()))?;
    let t = time.unwrap_or_else(now);
    let mut rng = ctx.rng(&format!("sign/{id}/{t}"));
    let sub = p.sign(&suite, &ms_pk.pk_g1, &dc_pk.pk_g1, &m, t, &mut rng)?;
    let line = sub.to_json() + "\n";
    let target = match out {
        Some(path) => {
            write_atomic(path, line.as_bytes(), false)?;
            path.to_path_buf()
        }
        None => {
            let path = ctx.store.path(store::OUTBOX);
            let mut queued = if path.exists() {
                ctx.store.read(&path)?
            } else {
                String::new()
            };
            queued.push_str(&line);
            write_atomic(&path, queued.as_bytes(), false)?;
            path
        }
    };
    println!(
        "{}",
        pretty(&serde_json::json!({
            "t": t,
            "digest": hex::encode(sub.digest()),
            "queued": target.display().to_string(),
        }))
    );
    Ok(0)
}

#[derive(Serialize)]
struct SubmitLine {
    seq: Option<u64>,
    status: &'static str,
    reason: Option<String>,
}

fn submit<B: PairingBackend>(
    ctx: &Ctx,
    slot_id: u64,
    input: Option<&Path>,
    start: Option<u64>,
    duration: u64,
) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let dc = load_dc(ctx, &suite)?;
    let slot_path = ctx.store.slot(slot_id);
    let mut slot = if slot_path.exists() {
        load_slot(ctx, &suite, slot_id)?
    } else {
        if duration == 0 {
            return Err(usage("--duration must be positive"));
        }
        let start = start.unwrap_or(slot_id.saturating_mul(duration));
        TimeSlot::new(slot_id, start, start.saturating_add(duration))?
    };
    let outbox = ctx.store.path(store::OUTBOX);
    let input_path = input
        .map(Path::to_path_buf)
        .unwrap_or_else(|| outbox.clone());
    let subs = Submission::<B>::parse_jsonl(&ctx.store.read(&input_path)?)?;

    let mut any_rejected = false;
    for sub in subs {
        let line = match dc.dc_open(&suite, sub, &mut slot) {
            Ok(seq) => SubmitLine {
                seq: Some(seq),
                status: "accepted",
                reason: None,
            },
            Err(reason) => {
                any_rejected = true;
                SubmitLine {
                    seq: slot.rejected().last().map(|r| r.seq),
                    status: "rejected",
                    reason: Some(reason.to_string()),
                }
            }
        };
        println!("{}", serde_json::to_string(&line).expect("serializable"));
    }
    write_atomic(&slot_path, slot.to_json().as_bytes(), false)?;
    if input.is_none() {
        write_atomic(&outbox, b"", false)?;
    }
    Ok(if any_rejected { EXIT_REJECTED } else { 0 })
}

fn aggregate<B: PairingBackend>(ctx: &Ctx, slot_id: u64) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let slot = load_slot(ctx, &suite, slot_id)?;
    if slot.is_empty() {
        return Err(mhcs_core::Error::EmptySlot.into());
    }
    let (u, v, iv) = slot.sums();
    let (start, end) = slot.window();
    let out = pretty(&serde_json::json!({
        "slot_id": slot_id,
        "start": start,
        "end": end,
        "n": slot.len(),
        "u": suite.g1_to_hex(u),
        "v": suite.g1_to_hex(v),
        "index_v": suite.g1_to_hex(iv),
    }));
    write_atomic(
        &ctx.store.slot_artifact(slot_id, "aggregate"),
        out.as_bytes(),
        false,
    )?;
    println!("{out}");
    Ok(0)
}

fn batch_verify<B: PairingBackend>(ctx: &Ctx, slot_id: u64) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let ms_pk = load_public(ctx, &suite, store::MS_PUBLIC)?;
    let slot = load_slot(ctx, &suite, slot_id)?;
    let report = close_slot_and_batch_verify(&suite, &slot, &ms_pk.pk_g2)?;
    let out = report.to_json();
    write_atomic(
        &ctx.store.slot_artifact(slot_id, "report"),
        out.as_bytes(),
        false,
    )?;
    println!("{out}");
    Ok(if report.verified { 0 } else { EXIT_REJECTED })
}

fn trace<B: PairingBackend>(ctx: &Ctx, index: &str) -> CliResult<u8> {
    let suite = load_suite::<B>(ctx)?;
    let ms = load_ms(ctx, &suite)?;
    let index_v = suite.g1_from_hex(index)?;
    let id = ms
        .trace(&index_v)
        .map_err(|_| rejected("pseudonym index not in the MS ledger"))?;
    println!(
        "{}",
        pretty(&serde_json::json!({
            "index_v": index,
            "id": String::from_utf8_lossy(id),
        }))
    );
    Ok(0)
}

fn simulate<B: PairingBackend>(cfg: &ScenarioConfig, out: Option<&Path>) -> CliResult<u8> {
    let outcome = run_scenario::<B>(cfg)?;
    let text = pretty(&outcome);
    if let Some(path) = out {
        write_atomic(path, text.as_bytes(), false)?;
    }
    println!("{text}");
    for r in &outcome.report.rejected_submissions {
        eprintln!("rejected seq {}: {}", r.seq, r.reason);
    }
    for seq in &outcome.report.offending {
        eprintln!("batch failed; offending seq {seq}");
    }
    Ok(if outcome.success { 0 } else { EXIT_REJECTED })
}

struct BenchOut<'a> {
    csv: Option<&'a Path>,
    json: Option<&'a Path>,
    no_timings: bool,
}

fn bench<B: PairingBackend>(cfg: &BenchConfig, out: &BenchOut<'_>) -> CliResult<u8> {
    let suite = BilinearSuite::<B>::new();
    let report = run_benchmark(&suite, cfg)?;
    if let Some(path) = out.csv {
        write_atomic(path, report.to_csv().as_bytes(), false)?;
    }
    if let Some(path) = out.json {
        let json = if out.no_timings {
            report.to_json_without_timings()
        } else {
            report.to_json()
        };
        write_atomic(path, json.as_bytes(), false)?;
    }
    println!("{}", report.to_table());
    let ok = report
        .rows
        .iter()
        .all(|r| r.batch_verified && r.clas_aggregate_verified);
    Ok(if ok { 0 } else { EXIT_REJECTED })
}
