"""Local annotation service: audit projects with append-only label logs.

Each project lives in its own directory under the store root:

    <root>/<project-id>/manifest.json   descriptor, seed, corpus hash
    <root>/<project-id>/sample.jsonl    the immutable drawn sample
    <root>/<project-id>/log.jsonl       append-only annotation records

Records are never rewritten; re-submission appends and the latest record
per (item, rater) wins at export. Export is a pure function of the log.
The HTTP layer is a thin JSON adapter over ProjectStore, intended for
localhost use by a single audit team; there is no authentication.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import corpus_io, sampling
from .resources import data_text
from .taxonomy import MONO, PARALLEL, AnnotationRecord, parse_label, validate_annotation

EXPORT_FIELDS = ("id", "corpus", "lang", "src", "tgt", "label", "porn",
                 "offensive", "rater", "ts", "note")


class ProjectError(Exception):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


def _slug(name: str) -> str:
    slug = re.sub(r"[^a-z0-9._-]+", "-", name.strip().lower()).strip("-")
    if not slug:
        raise ProjectError(f"cannot derive a project id from {name!r}")
    return slug


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class Ack:
    ok: bool
    item_id: str
    rater_id: str
    labeled_by_rater: int


class ProjectStore:
    """Owns the project directories; all writes to one log are serialized."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def _dir(self, project_id: str, must_exist: bool = True) -> Path:
        d = self.root / project_id
        if must_exist and not (d / "manifest.json").exists():
            raise ProjectError(f"unknown project: {project_id}", status=404)
        return d

    # -- creation ----------------------------------------------------------

    def create_project(self, name: str, corpus_path: str | Path, kind: str,
                       n: int, seed: int, lang: str | None = None,
                       src_lang: str | None = None, tgt_lang: str | None = None,
                       dataset: str = "", instructions: str | None = None) -> str:
        if kind not in (MONO, PARALLEL):
            raise ProjectError(f"kind must be '{MONO}' or '{PARALLEL}'")
        project_id = _slug(name)
        project_dir = self._dir(project_id, must_exist=False)
        if (project_dir / "manifest.json").exists():
            raise ProjectError(f"duplicate project name: {project_id}", status=409)

        corpus_path = Path(corpus_path)
        try:
            if kind == MONO:
                if not lang:
                    raise ProjectError("monolingual project needs a lang")
                units = list(corpus_io.read_monolingual(corpus_path, lang))
            else:
                if not (src_lang and tgt_lang):
                    raise ProjectError("parallel project needs src_lang and tgt_lang")
                units = list(corpus_io.read_parallel(corpus_path, src_lang, tgt_lang))
        except corpus_io.CorpusFormatError as e:
            raise ProjectError(str(e)) from None

        corpus_name = dataset or corpus_path.name
        sample = sampling.draw_sample(units, total=len(units), n=n, seed=seed)
        records = [corpus_io.item_to_record(item, corpus=corpus_name)
                   for item in sample.items]

        project_dir.mkdir(parents=True, exist_ok=True)
        with open(project_dir / "sample.jsonl", "w", encoding="utf-8") as fh:
            corpus_io.write_jsonl(records, fh)
        manifest = {
            "id": project_id,
            "corpus": corpus_name,
            "corpus_sha256": _sha256(corpus_path),
            "kind": kind,
            "lang": lang,
            "src_lang": src_lang,
            "tgt_lang": tgt_lang,
            "total_sentences": len(units),
            "requested_n": n,
            "seed": seed,
            "n_items": len(sample.items),
            "selected_indices": sample.selected_indices,
            "created": int(time.time()),
            "instructions": instructions if instructions is not None
                            else data_text("instructions.md"),
        }
        (project_dir / "manifest.json").write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2), encoding="utf-8")
        (project_dir / "log.jsonl").touch()
        return project_id

    # -- reads -------------------------------------------------------------

    def list_projects(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "manifest.json").exists())

    def manifest(self, project_id: str) -> dict:
        raw = (self._dir(project_id) / "manifest.json").read_text(encoding="utf-8")
        return json.loads(raw)

    def sample_items(self, project_id: str) -> list[dict]:
        items = []
        with open(self._dir(project_id) / "sample.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    items.append(json.loads(line))
        return items

    def _replay(self, project_id: str) -> list[dict]:
        """All log records in append order; a torn final line (crash during
        append) is ignored, earlier corruption is an error."""
        path = self._dir(project_id) / "log.jsonl"
        records = []
        raw = path.read_bytes().decode("utf-8")
        lines = raw.split("\n")
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                if i == len(lines) - 1:
                    break  # incomplete trailing append
                raise ProjectError(
                    f"corrupt log record at line {i + 1} of {path}", status=500)
        return records

    def next_items(self, project_id: str, rater_id: str,
                   limit: int | None = None) -> list[dict]:
        """Sample-ordered items this rater has not labeled yet."""
        done = {r["id"] for r in self._replay(project_id)
                if r["rater"] == rater_id}
        pending = [item for item in self.sample_items(project_id)
                   if item["id"] not in done]
        return pending if limit is None else pending[:limit]

    def progress(self, project_id: str) -> dict:
        items = self.sample_items(project_id)
        records = self._replay(project_id)
        latest: dict[tuple[str, str], dict] = {}
        for rec in records:
            latest[(rec["id"], rec["rater"])] = rec
        raters: dict[str, dict] = {}
        for (item_id, rater_id), rec in latest.items():
            r = raters.setdefault(rater_id,
                                  {"labeled": 0, "remaining": len(items),
                                   "labels": {}})
            r["labeled"] += 1
            r["remaining"] = len(items) - r["labeled"]
            r["labels"][rec["label"]] = r["labels"].get(rec["label"], 0) + 1
        return {
            "total_items": len(items),
            "total_records": len(records),
            "raters": dict(sorted(raters.items())),
            "unresolved_u": sum(1 for rec in latest.values()
                                if rec["label"] == "U"),
        }

    # -- writes ------------------------------------------------------------

    def submit(self, project_id: str, item_id: str, rater_id: str, label: str,
               porn: bool = False, offensive: bool = False,
               note: str | None = None) -> Ack:
        manifest = self.manifest(project_id)
        items = {item["id"] for item in self.sample_items(project_id)}
        if item_id not in items:
            raise ProjectError(f"unknown item: {item_id}", status=404)
        try:
            parsed = parse_label(label)
        except ValueError as e:
            raise ProjectError(str(e)) from None
        record = AnnotationRecord(item_id=item_id, rater_id=rater_id,
                                  label=parsed, offensive=offensive, porn=porn,
                                  note=note or None)
        violations = validate_annotation(record, manifest["kind"])
        if violations:
            raise ProjectError("; ".join(violations), status=422)

        entry = {"id": item_id, "rater": rater_id, "label": parsed.value,
                 "porn": bool(porn), "offensive": bool(offensive),
                 "note": note or None, "ts": int(time.time())}
        path = self._dir(project_id) / "log.jsonl"
        with self._lock(project_id):
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True)
                         + "\n")
                fh.flush()
            labeled = len({r["id"] for r in self._replay(project_id)
                           if r["rater"] == rater_id})
        return Ack(ok=True, item_id=item_id, rater_id=rater_id,
                   labeled_by_rater=labeled)

    # -- export ------------------------------------------------------------

    def export_records(self, project_id: str) -> tuple[dict, list[dict]]:
        """Latest record per (item, rater), ordered by item index then rater."""
        manifest = self.manifest(project_id)
        items = self.sample_items(project_id)
        order = {item["id"]: idx for idx, item in enumerate(items)}
        by_id = {item["id"]: item for item in items}
        latest: dict[tuple[str, str], dict] = {}
        for rec in self._replay(project_id):
            latest[(rec["id"], rec["rater"])] = rec
        rows = []
        for (item_id, rater_id) in sorted(latest,
                                          key=lambda k: (order[k[0]], k[1])):
            rec = latest[(item_id, rater_id)]
            item = by_id[item_id]
            row = {
                "id": item_id,
                "corpus": manifest["corpus"],
                "lang": item["lang"],
                "src": item["src"],
                "label": rec["label"],
                "porn": rec["porn"],
                "offensive": rec["offensive"],
                "rater": rater_id,
                "ts": rec["ts"],
                "note": rec["note"],
            }
            if manifest["kind"] == PARALLEL:
                row["tgt"] = item["tgt"]
            rows.append(row)
        header = {
            "manifest": {
                "project": project_id,
                "corpus": manifest["corpus"],
                "corpus_sha256": manifest["corpus_sha256"],
                "kind": manifest["kind"],
                "seed": manifest["seed"],
                "requested_n": manifest["requested_n"],
                "n_items": manifest["n_items"],
                "n_records": len(rows),
                "unresolved_u": sum(1 for r in rows if r["label"] == "U"),
            }
        }
        return header, rows

    def export_jsonl(self, project_id: str) -> str:
        header, rows = self.export_records(project_id)
        ordered = [{k: row[k] for k in EXPORT_FIELDS if k in row}
                   for row in rows]
        lines = [json.dumps(header, ensure_ascii=False, sort_keys=True)]
        lines += [json.dumps(row, ensure_ascii=False) for row in ordered]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# HTTP adapter

class AnnotationHandler(BaseHTTPRequestHandler):
    store: ProjectStore  # injected by make_server
    protocol_version = "HTTP/1.1"

    # quiet by default; the CLI enables logging
    def log_message(self, fmt, *args):  # noqa: A003
        pass

    def _send(self, status: int, payload, content_type="application/json"):
        body = (payload if isinstance(payload, (bytes, str))
                else json.dumps(payload, ensure_ascii=False))
        if isinstance(body, str):
            body = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type + "; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, e: Exception):
        status = getattr(e, "status", 400)
        self._send(status, {"error": str(e)})

    def _json_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        return json.loads(self.rfile.read(length).decode("utf-8"))

    def do_OPTIONS(self):  # noqa: N802
        self._send(204, b"")

    def do_GET(self):  # noqa: N802
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if parts == ["projects"]:
                self._send(200, {"projects": self.store.list_projects()})
            elif len(parts) == 2 and parts[0] == "projects":
                self._send(200, self.store.manifest(parts[1]))
            elif len(parts) == 3 and parts[0] == "projects":
                pid, action = parts[1], parts[2]
                if action == "items":
                    rater = query.get("rater", "")
                    if not rater:
                        raise ProjectError("missing rater parameter")
                    limit = int(query["limit"]) if "limit" in query else None
                    self._send(200, {"items": self.store.next_items(pid, rater,
                                                                    limit)})
                elif action == "progress":
                    self._send(200, self.store.progress(pid))
                elif action == "export":
                    self._send(200, self.store.export_jsonl(pid),
                               content_type="application/x-ndjson")
                else:
                    raise ProjectError(f"unknown endpoint: {url.path}", 404)
            else:
                raise ProjectError(f"unknown endpoint: {url.path}", 404)
        except Exception as e:  # noqa: BLE001
            self._error(e)

    def do_POST(self):  # noqa: N802
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            body = self._json_body()
            if parts == ["projects"]:
                project_id = self.store.create_project(
                    name=body["name"], corpus_path=body["corpus"],
                    kind=body["kind"], n=int(body.get("n", 100)),
                    seed=int(body.get("seed", 0)), lang=body.get("lang"),
                    src_lang=body.get("src_lang"),
                    tgt_lang=body.get("tgt_lang"),
                    dataset=body.get("dataset", ""))
                self._send(201, {"id": project_id})
            elif (len(parts) == 3 and parts[0] == "projects"
                  and parts[2] == "annotations"):
                ack = self.store.submit(
                    parts[1], item_id=body["id"], rater_id=body["rater"],
                    label=body["label"], porn=bool(body.get("porn", False)),
                    offensive=bool(body.get("offensive", False)),
                    note=body.get("note"))
                self._send(200, {"ok": ack.ok, "id": ack.item_id,
                                 "rater": ack.rater_id,
                                 "labeled_by_rater": ack.labeled_by_rater})
            else:
                raise ProjectError(f"unknown endpoint: {url.path}", 404)
        except KeyError as e:
            self._error(ProjectError(f"missing field: {e.args[0]}"))
        except Exception as e:  # noqa: BLE001
            self._error(e)


def make_server(root: str | Path, host: str = "127.0.0.1",
                port: int = 8765) -> ThreadingHTTPServer:
    store = ProjectStore(root)
    handler = type("BoundAnnotationHandler", (AnnotationHandler,),
                   {"store": store})
    return ThreadingHTTPServer((host, port), handler)


def serve(root: str | Path, host: str = "127.0.0.1", port: int = 8765) -> None:
    server = make_server(root, host, port)
    bound_host, bound_port = server.server_address[:2]
    print(f"annotation service on http://{bound_host}:{bound_port} (root: {root})",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
