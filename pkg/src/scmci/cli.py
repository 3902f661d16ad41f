"""Command line front-end: ``scmci {run,attack,analyze,report}``.

Exit codes: 0 success, 2 protocol abort, 3 bad configuration or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import analysis, kernels
from .adversary import attack_baseline, attack_scmci
from .baseline import BaselineSession
from .config import ScenarioConfig, Tamper, coerce, load_config
from .crypto import HashAlg
from .errors import ConfigError, ProtocolError, ScmciError
from .fixtures import purchase
from .protocol import Deployment, ProtocolConfig
from .seeding import derive_seed
from .wire import MsgType, Transcript, WireMessage, dump_frames

EXIT_OK, EXIT_ABORT, EXIT_CONFIG = 0, 2, 3


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text)
    return p


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def tamper_hook(t: Tamper):
    """Flip one payload bit of the ``t.frame``-th honest frame."""
    seen = 0

    def hook(msg: WireMessage, bus) -> WireMessage:
        nonlocal seen
        idx, seen = seen, seen + 1
        if idx != t.frame:
            return msg
        if t.bit >= 8 * len(msg.payload):
            raise ConfigError("tamper", f"frame {idx} has only {8 * len(msg.payload)} payload bits")
        data = bytearray(msg.payload)
        data[t.bit // 8] ^= 0x80 >> (t.bit % 8)
        return replace(msg, payload=bytes(data))

    return hook


def deployment_for(cfg: ScenarioConfig, seed: int | None = None) -> Deployment:
    pc = ProtocolConfig(rsa_bits=cfg.rsa_bits, sym_bytes=cfg.sym_bits // 8, hash_alg=HashAlg(cfg.hash))
    return Deployment(cfg.seed if seed is None else seed, pc)


# run


def _run_scmci(cfg: ScenarioConfig, dep: Deployment) -> tuple[list[WireMessage], list[dict], list[str], dict, ProtocolError | None]:
    frames, sessions, log = [], [], []
    ops: dict = {}
    for fid in cfg.fixtures:
        os, pd = purchase(fid)
        session = dep.session(hook=tamper_hook(cfg.tamper) if cfg.tamper else None)
        log.append(f"# fixture {fid} order {os.order_id.decode()}")
        error = None
        try:
            outcome = session.run(os, pd)
        except ProtocolError as exc:
            error = exc
        frames += session.transcript.messages()
        log += [f"Step {s:2d} [{actor}] {text}" for s, actor, text in session.recorder.steps]
        for phase, counts in session.op_counts().items():
            acc = ops.setdefault(phase, {})
            for k, v in counts.items():
                acc[k] = acc.get(k, 0) + v
        record = {"fixture": fid, "order_id": os.order_id.decode(), "frames": len(session.transcript)}
        if error is not None:
            record.update(status="ABORTED", step=error.step, code=error.code, error=str(error))
            sessions.append(record)
            return frames, sessions, log, ops, error
        envelopes_after = sum(1 for m in session.transcript.messages()[session.setup_frames :] if m.msg_type is MsgType.ENVELOPE)
        record.update(
            status="COMPLETE",
            steps=sorted(set(session.recorder.step_numbers())),
            cb_delta=outcome.cb_delta,
            mb_delta=outcome.mb_delta,
            setup_frames=session.setup_frames,
            envelopes_after_setup=envelopes_after,
        )
        sessions.append(record)
    return frames, sessions, log, ops, None


def _run_baseline(cfg: ScenarioConfig, dep: Deployment):
    frames, sessions, log = [], [], []
    ops: dict = {}
    for fid in cfg.fixtures:
        os, pd = purchase(fid)
        session = BaselineSession(dep, hook=tamper_hook(cfg.tamper) if cfg.tamper else None, padding=cfg.padding)
        delivered = session.run(os, pd)
        frames += session.transcript.messages()
        log.append(f"# fixture {fid} order {os.order_id.decode()}")
        for m in session.transcript.messages():
            log.append(f"{m.msg_type.name} {m.direction} seq={m.seq} {len(m.payload)}B")
        for k, v in session.counter.items():
            ops.setdefault("baseline", {})
            ops["baseline"][k] = ops["baseline"].get(k, 0) + v
        rejected = sum(len(rx.rejected) for rx in session.receivers.values())
        sessions.append(
            {
                "fixture": fid,
                "order_id": os.order_id.decode(),
                "status": "COMPLETE" if len(delivered) == 2 and not rejected else "REJECTED",
                "messages": session.messages_sent,
                "rejected": rejected,
            }
        )
    return frames, sessions, log, ops, None


def cmd_run(cfg: ScenarioConfig) -> int:
    out = Path(cfg.out)
    kernels.warmup()
    t0 = time.perf_counter()
    dep = deployment_for(cfg)
    t1 = time.perf_counter()
    runner = _run_scmci if cfg.protocol == "scmci" else _run_baseline
    frames, sessions, log, ops, error = runner(cfg, dep)
    t2 = time.perf_counter()
    transcript = Transcript.from_messages(frames)
    (out).mkdir(parents=True, exist_ok=True)
    (out / "run.transcript").write_bytes(dump_frames(frames))
    summary = {
        "protocol": cfg.protocol,
        "config": cfg.scenario_dict(),
        "status": "ABORTED" if error else "COMPLETE",
        "frames": len(transcript),
        "census": transcript.census(),
        "transcript_sha256": transcript.checksum(),
        "sessions": sessions,
        "op_counts": ops,
        "public_key_ops": {p: c.get("rsa_enc", 0) + c.get("rsa_dec", 0) for p, c in ops.items()},
    }
    if error:
        summary["abort"] = {"step": error.step, "code": error.code}
    _write(out, "summary.json", _json(summary))
    _write(out, "steps.log", "\n".join(log) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phase", "rsa_enc", "rsa_dec", "sym_enc", "sym_dec", "hash"])
    for phase, c in ops.items():
        w.writerow([phase] + [c.get(k, 0) for k in ("rsa_enc", "rsa_dec", "sym_enc", "sym_dec", "hash")])
    _write(out, "report.csv", buf.getvalue())
    _write(out, "timing.json", _json({"registration_s": t1 - t0, "protocol_s": t2 - t1, "backend": kernels.BACKEND}))
    if error:
        print(f"protocol abort at step {error.step}: {error.code}: {error}", file=sys.stderr)
        return EXIT_ABORT
    print(f"{cfg.protocol}: {len(sessions)} purchase(s) complete, {len(transcript)} frames, sha256 {transcript.checksum()[:16]}")
    return EXIT_OK


# attack


def cmd_attack(cfg: ScenarioConfig) -> int:
    out = Path(cfg.out)
    os, pd = purchase(cfg.fixtures[0])
    runs = []
    t0 = time.perf_counter()
    for i in range(cfg.attack_seeds):
        seed = cfg.seed if i == 0 else derive_seed(cfg.seed, "attack", i)
        dep = deployment_for(cfg, seed)
        if cfg.protocol == "baseline":
            session = BaselineSession(dep, key_bits=cfg.key_bits, padding=cfg.padding)
            session.run(os, pd)
            outcome = attack_baseline(session)
            record = {"seed": seed, **outcome.to_dict()}
        else:
            session = dep.session()
            session.run(os, pd)
            outcome = attack_scmci(dep, session.transcript, os, pd)
            rerun = dep.session().run(os, pd)
            record = {"seed": seed, **outcome.to_dict(), "honest_rerun": "COMPLETE" if rerun.complete else "FAILED"}
        runs.append(record)
        print(f"seed {seed}: {outcome.status} after {outcome.query_count} queries (budget {outcome.budget})")
    report = {"protocol": cfg.protocol, "config": cfg.scenario_dict(), "runs": runs}
    _write(out, "attack.json", _json(report))
    _write(out, "timing.json", _json({"attack_s": time.perf_counter() - t0}))
    return EXIT_OK


# analyze / report


def cmd_analyze(paths: list[str], out: Path) -> int:
    if not paths:
        raise ConfigError("transcripts", "no transcript paths given")
    results = []
    for p in paths:
        try:
            results.append(analysis.analyze_transcript(p))
        except OSError as exc:
            raise ConfigError("transcripts", f"cannot read {p}: {exc.strerror}") from None
        except (analysis.EmptyTranscript, ScmciError) as exc:
            raise ConfigError("transcripts", f"{p}: {exc}") from None
    _write(out, "analysis.json", _json(results))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["file", "stream", "bytes", "entropy"])
    for r in results:
        for k, e in r["entropy"].items():
            w.writerow([r["file"], k, r["bytes"][k], "" if e is None else f"{e:.6f}"])
    _write(out, "analysis.csv", buf.getvalue())
    for r in results:
        print(f"{r['file']}: {r['frames']} frames, entropy ALL {r['entropy']['ALL']:.4f} bits/byte")
    return EXIT_OK


def cmd_report(cfg: ScenarioConfig) -> int:
    out = Path(cfg.out)
    kernels.warmup()
    rep = analysis.compare_pipelines(seeds=cfg.report_seeds)
    _write(out, "entropy.json", rep.to_json())
    _write(out, "report.csv", rep.to_csv())
    hist = []
    for (stream, proto), h in rep.histograms.items():
        hist.append(f"## {stream} {proto} entropy={rep.entropy[(stream, proto)]:.6f}")
        hist.append(h.render())
    _write(out, "histograms.txt", "\n".join(hist) + "\n")
    _write(out, "timing.json", _json({"elapsed_s": rep.elapsed, "backend": kernels.BACKEND}))
    print(rep.to_csv(), end="")
    lower = rep.lower_for_scmci()
    print("SCMCI lower entropy: " + ", ".join(f"{s}={'yes' if v else 'no'}" for s, v in lower.items()))
    return EXIT_OK


# argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", help="64-bit scenario seed")
    common.add_argument("--protocol", choices=["scmci", "baseline"])
    common.add_argument("--rsa-bits")
    common.add_argument("--hash", choices=["md5", "sha256"])
    common.add_argument("--out", help="output directory")
    common.add_argument("--tamper", help="<frame-index>:<bit-index> payload bit to flip")
    common.add_argument("--fixtures", help="comma-separated fixture ids (0-9)")
    common.add_argument("--key-bits", help="baseline session key width for the attack")
    common.add_argument("--padding", choices=["none", "oaep"], help="baseline key sealing")
    common.add_argument("--attack-seeds", help="number of seeds in the attack matrix")

    p = argparse.ArgumentParser(prog="scmci", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run setup, purchase and settlement")
    sub.add_parser("attack", parents=[common], help="run the key-substitution attack")
    an = sub.add_parser("analyze", parents=[common], help="entropy of transcript files")
    an.add_argument("transcripts", nargs="*")
    sub.add_parser("report", parents=[common], help="entropy and op-count comparison of both pipelines")
    return p


_OVERRIDES = ("seed", "protocol", "rsa_bits", "hash", "out", "tamper", "fixtures", "key_bits", "padding", "attack_seeds")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        overrides = {}
        for name in _OVERRIDES:
            value = getattr(args, name)
            if value is not None:
                overrides[name] = coerce(name, value)
        cfg = load_config(args.config, **overrides)
        if args.command == "run":
            rc = cmd_run(cfg)
            return cmd_attack(cfg) if rc == EXIT_OK and cfg.attack else rc
        if args.command == "attack":
            return cmd_attack(cfg)
        if args.command == "analyze":
            return cmd_analyze(args.transcripts, Path(cfg.out))
        return cmd_report(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
