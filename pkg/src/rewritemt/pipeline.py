"""Stage orchestration: every stage reads and writes persisted record files,
never in-memory state, so runs are auditable and resumable.

A stage whose output files already exist is skipped (delete them or pass
force=True to regenerate); the response cache makes upstream replays cheap.
With stub backends and a fixed seed, two runs produce byte-identical
artifacts.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import humaneval as he
from .backends import GenerationRequest, ScoreRequest
from .config import PipelineConfig
from .corpus import load_segments, read_jsonl, write_records
from .errors import MissingDependency, MissingScore
from .ftdata import FtdataConfig, build_dpos, emit_sft_records, write_training_manifest
from .metrics import aggregate, correlation_report, render_results_table
from .pareto import MethodPoint, frontier_flags, pareto_frontier
from .prompts import render_prompt
from .readability import INDICES, indices_for_language
from .rewrite import RewriteRecord, copy_rate, run_postedit, run_rewrite
from .selection import SelectionOutcome, batch_select, tournament_select
from .errors import DegenerateInput

log = logging.getLogger(__name__)

STAGES = ("rewrite", "translate", "score", "select", "postedit", "ftdata",
          "evaluate", "readability", "pareto", "humaneval", "report")

STAGE_OUTPUTS = {
    "rewrite": ("rewrites.jsonl",),
    "translate": ("translations.jsonl",),
    "score": ("scores.jsonl",),
    "select": ("selection.jsonl", "selection_summary.json"),
    "postedit": ("postedit.jsonl", "postedit_summary.json"),
    "ftdata": ("dpos.jsonl", "sft_manifest.json"),
    "evaluate": ("eval_rows.json", "correlation.json"),
    "readability": ("readability.jsonl", "readability_summary.json"),
    "pareto": ("pareto.json",),
    "humaneval": ("humaneval.json", "survey_manifest.json"),
    "report": ("report.txt", "report.json"),
}


class Pipeline:
    def __init__(self, config: PipelineConfig, corpus_path: str | Path,
                 out_dir: str | Path, force: bool = False):
        self.config = config
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.segments = load_segments(corpus_path, config.pair)
        self.clients = config.build_clients()
        self.force = force

    # -- plumbing -----------------------------------------------------------

    def path(self, name: str) -> Path:
        return self.out / name

    def _outputs_exist(self, stage: str) -> bool:
        return all(self.path(n).exists() for n in STAGE_OUTPUTS[stage])

    def _require(self, stage: str, filename: str, producer: str) -> Path:
        p = self.path(filename)
        if not p.exists():
            raise MissingDependency(stage, producer)
        return p

    def run(self, stages) -> list[str]:
        """Run the requested stages in canonical order; returns those executed."""
        requested = set(stages)
        unknown = requested - set(STAGES)
        if unknown:
            raise ValueError(f"unknown stages: {sorted(unknown)}")
        executed = []
        for stage in STAGES:
            if stage not in requested:
                continue
            if not self.force and self._outputs_exist(stage):
                log.info("stage %s: outputs exist, skipping", stage)
                continue
            getattr(self, f"stage_{stage}")()
            executed.append(stage)
        return executed

    # -- stages -------------------------------------------------------------

    def stage_rewrite(self) -> None:
        gen = self.clients[self.config.generation_backend]
        tasks = [(seg, method) for seg in self.segments
                 for method in self.config.methods]

        def job(task):
            seg, method = task
            return run_rewrite(seg, method, gen, max_tokens=self.config.max_tokens)

        if self.config.max_inflight > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.config.max_inflight) as pool:
                results = list(pool.map(job, tasks))  # order-preserving
        else:
            results = [job(t) for t in tasks]
        write_records(self.path("rewrites.jsonl"), [r for r in results if r is not None])

    def stage_translate(self) -> None:
        mt = self.clients[self.config.mt_backend]
        rewrites_path = self.path("rewrites.jsonl")
        rewrites = ([RewriteRecord.from_dict(o) for o in read_jsonl(rewrites_path)]
                    if rewrites_path.exists() else [])
        if not rewrites:
            log.info("translate: no rewrite outputs, translating originals only")

        tasks = []  # (segment_id, method, text_to_translate or fixed translation)
        for seg in self.segments:
            tasks.append((seg.id, "original", seg.source, None))
        order = {m: i for i, m in enumerate(self.config.methods)}
        for rec in sorted(rewrites, key=lambda r: (self._seg_index(r.segment_id),
                                                   order.get(r.method, 99))):
            if rec.method == "cot" and len(rec.stage_outputs) > 1:
                # CoT translates within the method; stage 2 already holds t'.
                tasks.append((rec.segment_id, rec.method, None, rec.stage_outputs[1]))
            else:
                tasks.append((rec.segment_id, rec.method, rec.rewrite, None))

        pending = [(i, t[2]) for i, t in enumerate(tasks) if t[3] is None]
        prompts = [self._translation_prompt(text) for _, text in pending]
        outputs = mt.generate_many([
            GenerationRequest(prompt=p, backend_id=mt.backend_id,
                              max_tokens=self.config.max_tokens)
            for p in prompts
        ])
        translated = {i: out for (i, _), out in zip(pending, outputs)}

        records = []
        for i, (seg_id, method, _, fixed) in enumerate(tasks):
            text = fixed if fixed is not None else translated[i]
            if not text:
                log.warning("empty translation for segment=%s method=%s", seg_id, method)
                continue
            records.append({"segment_id": seg_id, "method": method, "text": text})
        write_records(self.path("translations.jsonl"), records)

    def _translation_prompt(self, text: str) -> str:
        return render_prompt("cot", text, tgt_lang=self.config.pair.tgt, stage=2).text

    def stage_score(self) -> None:
        self._require("score", "translations.jsonl", "translate")
        translations = self._load_translations()
        rewrites = self._load_rewrites()
        scorer = self.clients[self.config.scorer_backend]
        metricx = (self.clients[self.config.metricx_backend]
                   if self.config.metricx_backend else None)

        records = []
        for seg in self.segments:
            methods = ["original"] + [m for m in self.config.methods
                                      if (seg.id, m) in translations]
            for method in methods:
                if method == "original":
                    input_text = seg.source
                else:
                    rec = rewrites.get((seg.id, method))
                    if rec is None:
                        continue
                    input_text = rec.rewrite
                translation = translations.get((seg.id, method))
                if translation is None:
                    continue
                records.extend(self._score_one(
                    scorer, metricx, seg.id, method, input_text, translation,
                    seg.reference))
        write_records(self.path("scores.jsonl"), records)

    def _score_one(self, scorer, metricx, seg_id, method, input_text, translation,
                   reference) -> list[dict]:
        out = []

        def add(client, role, req):
            record = client.score(req, segment_id=seg_id)
            out.append({
                "segment_id": seg_id, "method": method, "role": role,
                "metric": record.metric, "arity": record.arity,
                "value": record.value, "direction": record.direction,
            })

        add(scorer, "translatability",
            ScoreRequest(source=input_text, hypothesis=translation, reference=None,
                         metric="qe", backend_id=scorer.backend_id))
        if reference:
            add(scorer, "meaning_preservation",
                ScoreRequest(source="", hypothesis=input_text, reference=reference,
                             metric="ref_only", backend_id=scorer.backend_id))
            add(scorer, "combined",
                ScoreRequest(source=input_text, hypothesis=translation,
                             reference=reference, metric="qe_ref",
                             backend_id=scorer.backend_id))
        if metricx is not None:
            add(metricx, "metricx_qe",
                ScoreRequest(source=input_text, hypothesis=translation, reference=None,
                             metric="qe", backend_id=metricx.backend_id))
            if reference:
                add(metricx, "metricx_ref",
                    ScoreRequest(source="", hypothesis=translation, reference=reference,
                                 metric="ref_only", backend_id=metricx.backend_id))
        return out

    def stage_select(self) -> None:
        self._require("select", "scores.jsonl", "score")
        per_method = self._collect_per_method()
        method = self.config.selection_method
        originals = per_method.get("original", {}).get("translatability", {})
        seg_order = [s.id for s in self.segments]

        if self.config.selection_mode == "tournament":
            candidates: dict[str, dict[str, float]] = {}
            for m in self.config.methods:
                for seg_id, value in per_method.get(m, {}).get("translatability", {}).items():
                    candidates.setdefault(seg_id, {})[m] = value
            outcomes, summary = tournament_select(candidates, originals, seg_order)
            summary["mode"] = "tournament"
        else:
            rewritten = per_method.get(method, {}).get("translatability", {})
            pairs = {}
            for seg_id in seg_order:
                if seg_id not in originals:
                    raise MissingScore(seg_id, "original")
                if seg_id not in rewritten:
                    raise MissingScore(seg_id, method)
                pairs[seg_id] = (originals[seg_id], rewritten[seg_id])
            outcomes, summary = batch_select(pairs, method, seg_order)
            summary["mode"] = "single"
        summary["method"] = method
        write_records(self.path("selection.jsonl"), outcomes)
        self._write_json("selection_summary.json", summary)

    def stage_postedit(self) -> None:
        self._require("postedit", "translations.jsonl", "translate")
        translations = self._load_translations()
        rewrites = self._load_rewrites()
        mt = self.clients[self.config.mt_backend]
        scorer = self.clients[self.config.scorer_backend]
        method = self.config.selection_method

        records = []
        sums: dict[str, dict[str, list[float]]] = {}
        for seg in self.segments:
            t_orig = translations.get((seg.id, "original"))
            if t_orig is None:
                continue
            for mode in self.config.postedit_modes:
                if mode == "i_plus_o":
                    t_in = translations.get((seg.id, method))
                    rec = rewrites.get((seg.id, method))
                    if t_in is None or rec is None:
                        continue
                    input_text = rec.rewrite
                else:
                    t_in = t_orig
                    input_text = seg.source
                edited = run_postedit(seg, t_in, mode, mt,
                                      max_tokens=self.config.max_tokens)
                records.append({"segment_id": seg.id, "mode": mode, "text": edited})
                bucket = sums.setdefault(mode, {"translatability": [], "combined": []})
                qe = scorer.score(ScoreRequest(source=input_text, hypothesis=edited,
                                               reference=None, metric="qe",
                                               backend_id=scorer.backend_id),
                                  segment_id=seg.id)
                bucket["translatability"].append(qe.value)
                if seg.reference:
                    combined = scorer.score(
                        ScoreRequest(source=input_text, hypothesis=edited,
                                     reference=seg.reference, metric="qe_ref",
                                     backend_id=scorer.backend_id),
                        segment_id=seg.id)
                    bucket["combined"].append(combined.value)

        summary = {
            mode: {k: (round(sum(v) / len(v), 6) if v else None)
                   for k, v in buckets.items()}
            for mode, buckets in sums.items()
        }
        write_records(self.path("postedit.jsonl"), records)
        self._write_json("postedit_summary.json", summary)

    def stage_ftdata(self) -> None:
        self._require("ftdata", "rewrites.jsonl", "rewrite")
        self._require("ftdata", "scores.jsonl", "score")
        per_method = self._collect_per_method()
        rewrites = self._load_rewrites()
        translations = self._load_translations() if self.path("translations.jsonl").exists() else {}

        agnostic = {m.name for m in _mt_agnostic_methods(self.config)}
        candidate_records = [rec for rec in rewrites.values() if rec.method in agnostic]
        candidate_records.sort(key=lambda r: (self._seg_index(r.segment_id), r.method))

        score_original = per_method.get("original", {}).get("translatability", {})
        score_rewrite = {
            (seg_id, m): v
            for m in agnostic
            for seg_id, v in per_method.get(m, {}).get("translatability", {}).items()
        }
        ft_config = FtdataConfig(seed=self.config.seed)
        t_orig = {seg.id: translations.get((seg.id, "original")) for seg in self.segments}
        examples, stats = build_dpos(self.segments, candidate_records, score_original,
                                     score_rewrite, ft_config,
                                     translations={k: v for k, v in t_orig.items() if v})
        write_records(self.path("dpos.jsonl"), examples)

        split_counts = {}
        emitted = {"basic": True,
                   "mt": all(ex.mt_output for ex in examples) and bool(examples),
                   "reference": all(ex.reference for ex in examples) and bool(examples)}
        for template, ok in emitted.items():
            if not ok:
                continue
            total = emit_sft_records(examples, template,
                                     self.path(f"sft_{template}"), ft_config,
                                     tgt_lang=self.config.pair.tgt)
            n_train = int(total * ft_config.train_fraction + 1e-9)
            split_counts[template] = {"train": n_train, "valid": total - n_train}
        write_training_manifest(self.path("sft_manifest.json"), stats, ft_config,
                                split_counts)

    def stage_evaluate(self) -> None:
        self._require("evaluate", "scores.jsonl", "score")
        rows = self._eval_rows()
        self._write_json("eval_rows.json", {"alpha": 0.05, "rows": [r.to_dict() for r in rows]})

        reports = []
        method_points = [(r.means["translatability"], r.means["meaning_preservation"])
                         for r in rows
                         if r.method != "original"
                         and r.means.get("translatability") is not None
                         and r.means.get("meaning_preservation") is not None]
        if len(method_points) >= 2:
            try:
                reports.append(correlation_report(str(self.config.pair), method_points,
                                                  "methods").to_dict())
            except DegenerateInput:
                reports.append({"pair": str(self.config.pair), "grouping": "methods",
                                "error": "zero variance"})
        per_method = self._collect_per_method()
        m = self.config.selection_method
        qe = per_method.get(m, {}).get("translatability", {})
        mp = per_method.get(m, {}).get("meaning_preservation", {})
        seg_points = [(qe[i], mp[i]) for i in sorted(qe) if i in mp]
        if len(seg_points) >= 2:
            try:
                reports.append(correlation_report(str(self.config.pair), seg_points,
                                                  "segments").to_dict())
            except DegenerateInput:
                reports.append({"pair": str(self.config.pair), "grouping": "segments",
                                "error": "zero variance"})
        self._write_json("correlation.json", reports)

    def stage_readability(self) -> None:
        rewrites = self._load_rewrites() if self.path("rewrites.jsonl").exists() else {}
        translations = (self._load_translations()
                        if self.path("translations.jsonl").exists() else {})
        selection = self._load_selection()

        texts = []  # (kind, method, segment_id, lang, text)
        for seg in self.segments:
            texts.append(("source", "original", seg.id, "en", seg.source))
        for (seg_id, method), rec in sorted(rewrites.items(),
                                            key=lambda kv: (self._seg_index(kv[0][0]), kv[0][1])):
            texts.append(("rewrite", method, seg_id, "en", rec.rewrite))
        if selection:
            by_id = {s.id: s for s in self.segments}
            for outcome in selection:
                seg = by_id[outcome.segment_id]
                if outcome.chosen == "rewrite":
                    rec = rewrites.get((outcome.segment_id, outcome.method))
                    chosen_text = rec.rewrite if rec else seg.source
                else:
                    chosen_text = seg.source
                texts.append(("selection_input", "selection", outcome.segment_id,
                              "en", chosen_text))
        tgt = self.config.pair.tgt
        if indices_for_language(tgt):
            for (seg_id, method), text in sorted(translations.items(),
                                                 key=lambda kv: (self._seg_index(kv[0][0]), kv[0][1])):
                texts.append(("translation", method, seg_id, tgt, text))

        per_text = []
        sums: dict[tuple[str, str, str], list[float]] = {}
        for kind, method, seg_id, lang, text in texts:
            row = {"kind": kind, "method": method, "segment_id": seg_id, "lang": lang}
            for index_name in indices_for_language(lang):
                fn = INDICES[index_name][0]
                try:
                    value = fn(text)
                except Exception:
                    continue
                row[index_name] = round(value, 4)
                sums.setdefault((kind, method, index_name), []).append(value)
            per_text.append(row)

        summary = [
            {"kind": kind, "method": method, "index": index_name,
             "mean": round(sum(vals) / len(vals), 2), "n": len(vals)}
            for (kind, method, index_name), vals in sorted(sums.items())
        ]
        write_records(self.path("readability.jsonl"), per_text)
        self._write_json("readability_summary.json", summary)

    def stage_pareto(self) -> None:
        self._require("pareto", "eval_rows.json", "evaluate")
        eval_data = json.loads(self.path("eval_rows.json").read_text(encoding="utf-8"))
        points = []
        for row in eval_data["rows"]:
            x = row["means"].get("translatability")
            y = row["means"].get("meaning_preservation")
            if x is not None and y is not None:
                points.append(MethodPoint(row["method"], x, y))
        if not points:
            raise MissingDependency("pareto", "evaluate (no usable method points)")
        frontier = pareto_frontier(points)
        self._write_json("pareto.json", {
            "points": frontier_flags(points),
            "frontier": [p.to_dict() for p in frontier],
        })

    def stage_humaneval(self) -> None:
        if not (self.config.humaneval_pairwise or self.config.humaneval_likert):
            raise MissingDependency("humaneval", "annotation export paths in config")
        result: dict = {}
        manifest_items: list[str] = []
        if self.config.humaneval_pairwise:
            judgments = he.load_pairwise(self.config.humaneval_pairwise)
            result["win_rates"] = he.win_rates(judgments)
            kappas = {}
            for axis in he.AXES:
                matrix = he.pairwise_matrix(judgments, axis)
                if matrix:
                    kappas[axis] = round(he.fleiss_kappa(matrix), 4)
            result["fleiss_kappa"] = kappas
            result["n_pairwise"] = len(judgments)
            manifest_items = sorted({j.item_id for j in judgments})
        if self.config.humaneval_likert:
            judgments = he.load_likert(self.config.humaneval_likert)
            counts, mean = he.likert_summary(judgments)
            result["likert"] = {"counts": {str(k): v for k, v in counts.items()},
                                "mean": mean, "n": len(judgments)}
        self._write_json("humaneval.json", result)
        self._write_json("survey_manifest.json",
                         he.emit_survey_manifest(manifest_items, seed=self.config.seed))

    def stage_report(self) -> None:
        sections: list[str] = []
        bundle: dict = {"pair": str(self.config.pair), "seed": self.config.seed,
                        "methods": list(self.config.methods)}
        sections.append(f"Rewriting evaluation report — pair {self.config.pair}, "
                        f"seed {self.config.seed}")

        rendered_any = False
        if self.path("scores.jsonl").exists():
            rows = self._eval_rows()
            sections.append("Main results\n" + render_results_table(rows))
            bundle["eval_rows"] = [r.to_dict() for r in rows]
            rendered_any = True
        if self.path("selection_summary.json").exists():
            summary = json.loads(self.path("selection_summary.json").read_text(encoding="utf-8"))
            sections.append(
                "Selection\nRewrites preferred to original inputs in "
                f"{summary['n_rewrite_chosen']}/{summary['n_total']} cases "
                f"(method: {summary.get('method', '?')}, mode: {summary.get('mode', 'single')}).\n")
            bundle["selection"] = summary
            rendered_any = True
        if self.path("rewrites.jsonl").exists():
            by_method: dict[str, list] = {}
            for rec in self._load_rewrites().values():
                by_method.setdefault(rec.method, []).append(rec)
            lines = ["Copy rates (% of rewrites identical to source)"]
            copy_rates = {}
            for method in self.config.methods:
                if method in by_method:
                    rate = copy_rate(by_method[method])
                    copy_rates[method] = rate
                    lines.append(f"  {method}: {rate}")
            sections.append("\n".join(lines) + "\n")
            bundle["copy_rates"] = copy_rates
            rendered_any = True
        if self.path("readability_summary.json").exists():
            summary = json.loads(self.path("readability_summary.json").read_text(encoding="utf-8"))
            lines = ["Readability (corpus means)"]
            for entry in summary:
                lines.append(f"  {entry['kind']}/{entry['method']} {entry['index']}: "
                             f"{entry['mean']}")
            sections.append("\n".join(lines) + "\n")
            bundle["readability"] = summary
            rendered_any = True
        if self.path("pareto.json").exists():
            pareto_data = json.loads(self.path("pareto.json").read_text(encoding="utf-8"))
            frontier_names = ", ".join(p["method"] for p in pareto_data["frontier"])
            sections.append(f"Pareto frontier\n  {frontier_names}\n")
            bundle["pareto"] = pareto_data
            rendered_any = True
        if self.path("postedit_summary.json").exists():
            summary = json.loads(self.path("postedit_summary.json").read_text(encoding="utf-8"))
            lines = ["Post-editing comparison (corpus means)"]
            for mode in ("owo", "ow", "i_plus_o"):
                if mode in summary:
                    entry = summary[mode]
                    lines.append(f"  {mode}: translatability={entry['translatability']} "
                                 f"combined={entry['combined']}")
            sections.append("\n".join(lines) + "\n")
            bundle["postedit"] = summary
            rendered_any = True
        if self.path("humaneval.json").exists():
            data = json.loads(self.path("humaneval.json").read_text(encoding="utf-8"))
            lines = ["Human evaluation"]
            for axis, entry in data.get("win_rates", {}).items():
                lines.append(f"  {axis}: win {entry['win_pct']}% / loss {entry['loss_pct']}% "
                             f"/ tie {entry['tie_pct']}%")
            for axis, kappa in data.get("fleiss_kappa", {}).items():
                lines.append(f"  kappa[{axis}]: {kappa}")
            if "likert" in data:
                lines.append(f"  likert mean: {data['likert']['mean']} "
                             f"(n={data['likert']['n']})")
            sections.append("\n".join(lines) + "\n")
            bundle["humaneval"] = data
            rendered_any = True

        if not rendered_any:
            raise MissingDependency("report", "score (or any other stage output)")
        self.path("report.txt").write_text("\n".join(sections), encoding="utf-8")
        self._write_json("report.json", bundle)

    # -- shared loading -----------------------------------------------------

    def _seg_index(self, seg_id: str) -> int:
        if not hasattr(self, "_seg_order"):
            self._seg_order = {s.id: i for i, s in enumerate(self.segments)}
        return self._seg_order.get(seg_id, len(self._seg_order))

    def _load_rewrites(self) -> dict[tuple[str, str], RewriteRecord]:
        path = self.path("rewrites.jsonl")
        if not path.exists():
            return {}
        return {(r.segment_id, r.method): r
                for r in (RewriteRecord.from_dict(o) for o in read_jsonl(path))}

    def _load_translations(self) -> dict[tuple[str, str], str]:
        path = self.path("translations.jsonl")
        if not path.exists():
            return {}
        return {(o["segment_id"], o["method"]): o["text"] for o in read_jsonl(path)}

    def _load_selection(self) -> list[SelectionOutcome]:
        path = self.path("selection.jsonl")
        if not path.exists():
            return []
        return [SelectionOutcome.from_dict(o) for o in read_jsonl(path)]

    def _collect_per_method(self) -> dict:
        """scores.jsonl -> {method: {role: {segment_id: value}}}."""
        per_method: dict = {}
        for obj in read_jsonl(self.path("scores.jsonl")):
            per_method.setdefault(obj["method"], {}).setdefault(
                obj["role"], {})[obj["segment_id"]] = float(obj["value"])
        return per_method

    def _eval_rows(self):
        per_method = self._collect_per_method()
        ordered: dict = {}
        if "original" in per_method:
            ordered["original"] = per_method["original"]
        for method in self.config.methods:
            if method in per_method:
                ordered[method] = per_method[method]
        selection = self._load_selection()
        if selection and "original" in per_method:
            ordered["selection"] = self._selection_scores(per_method, selection)
        return aggregate(ordered, seed=self.config.seed)

    def _selection_scores(self, per_method: dict, selection) -> dict:
        """Per-segment scores of whichever input selection chose."""
        columns: dict = {}
        for outcome in selection:
            source_method = outcome.method if outcome.chosen == "rewrite" else "original"
            if source_method.startswith("tournament:"):
                source_method = source_method.split(":", 1)[1]
            for role, values in per_method.get(source_method, {}).items():
                if outcome.segment_id in values:
                    columns.setdefault(role, {})[outcome.segment_id] = \
                        values[outcome.segment_id]
        return columns

    def _write_json(self, name: str, obj) -> None:
        self.path(name).write_text(
            json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8")


def _mt_agnostic_methods(config: PipelineConfig):
    from .prompts import get_method
    return [get_method(m) for m in config.methods
            if get_method(m).family == "mt_agnostic"]
