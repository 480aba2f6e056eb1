"""HTTP surface for user-guided evolution sessions.

Plain-JSON endpoints over the standard-library threading HTTP server:

    GET  /api/session    {session_id, generation, pop_size, mode, status}
    GET  /api/world      arena bounds, obstacles, target, terrain kind
    GET  /api/generation [{id, fitness, reached, rotations_l, rotations_r,
                           trajectory, sensor_performance}, ...]
    POST /api/selection  {"ids": [..]} -> 200 {"generation": n+1}
                         or 400 {"error": "InvalidSelection"}
    GET  /api/stream     newline-delimited JSON events: generation_ready,
                         evaluation_progress {done,total}, session_paused
    GET  /api/history    [{generation, best, mean, lineage_share}, ...]

Anything outside /api/ serves static files from an optional UI directory.
Selection handling is serialized with a lock; stream connections each get
their own event queue fed by the session's listeners.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .evolution import GuidedSession, InvalidSelection

logger = logging.getLogger(__name__)

__all__ = ["SessionServer"]

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
}


class SessionServer:
    """Owns a GuidedSession and serves it over HTTP until stopped."""

    def __init__(self, session: GuidedSession, host: str = "127.0.0.1", port: int = 0,
                 ui_dir: str | None = None):
        self.session = session
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self._lock = threading.Lock()
        self._queues: list[queue.Queue] = []
        session.add_listener(self._broadcast)
        handler = self._make_handler()
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.httpd.server_address[0]}:{self.port}"

    def _broadcast(self, event: dict) -> None:
        for q in list(self._queues):
            q.put(event)

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    # -- request handling -----------------------------------------------------

    def _world_payload(self) -> dict:
        world = self.session.world
        return {
            "bounds": {
                "x_min": world.bounds.x_min,
                "y_min": world.bounds.y_min,
                "x_max": world.bounds.x_max,
                "y_max": world.bounds.y_max,
            },
            "terrain": world.terrain.kind.value,
            "obstacles": [
                {"x": o.center[0], "y": o.center[1], "radius": o.radius}
                for o in world.obstacles
            ],
            "target": {
                "x": world.target.center[0],
                "y": world.target.center[1],
                "radius": world.target.radius,
            },
        }

    def _make_handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                logger.debug("http: " + fmt, *args)

            def _json(self, payload, status: int = 200) -> None:
                body = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(body)

            def do_OPTIONS(self):
                self.send_response(204)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.send_header("Content-Length", "0")
                self.end_headers()

            def do_GET(self):
                session = server.session
                if self.path == "/api/session":
                    with server._lock:
                        session.check_timeout()
                        self._json(session.info())
                elif self.path == "/api/world":
                    self._json(server._world_payload())
                elif self.path == "/api/generation":
                    with server._lock:
                        payload = [asdict(c) for c in session.candidates()]
                    self._json(payload)
                elif self.path == "/api/history":
                    with server._lock:
                        self._json(list(session.history))
                elif self.path == "/api/stream":
                    self._stream()
                else:
                    self._static()

            def _stream(self):
                q: queue.Queue = queue.Queue()
                server._queues.append(q)
                try:
                    self.send_response(200)
                    self.send_header("Content-Type", "application/x-ndjson")
                    self.send_header("Cache-Control", "no-cache")
                    self.send_header("Access-Control-Allow-Origin", "*")
                    self.send_header("Connection", "close")
                    self.end_headers()
                    hello = {"event": "stream_open", "generation": server.session.generation}
                    self.wfile.write((json.dumps(hello) + "\n").encode())
                    self.wfile.flush()
                    while True:
                        try:
                            event = q.get(timeout=1.0)
                        except queue.Empty:
                            with server._lock:
                                server.session.check_timeout()
                            continue
                        self.wfile.write((json.dumps(event) + "\n").encode())
                        self.wfile.flush()
                except (BrokenPipeError, ConnectionResetError):
                    pass
                finally:
                    if q in server._queues:
                        server._queues.remove(q)

            def _static(self):
                if server.ui_dir is None:
                    self._json({"error": "NotFound"}, status=404)
                    return
                rel = self.path.lstrip("/") or "index.html"
                target = (server.ui_dir / rel).resolve()
                if not str(target).startswith(str(server.ui_dir)) or not target.is_file():
                    self._json({"error": "NotFound"}, status=404)
                    return
                body = target.read_bytes()
                self.send_response(200)
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                if self.path != "/api/selection":
                    self._json({"error": "NotFound"}, status=404)
                    return
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length) or b"{}")
                    ids = payload["ids"]
                    if not isinstance(ids, list):
                        raise ValueError("ids must be a list")
                    ids = [int(i) for i in ids]
                except (KeyError, ValueError, json.JSONDecodeError) as err:
                    self._json({"error": "InvalidSelection", "detail": str(err)}, status=400)
                    return
                try:
                    with server._lock:
                        generation = server.session.select(ids)
                except InvalidSelection as err:
                    self._json({"error": "InvalidSelection", "detail": str(err)}, status=400)
                    return
                self._json({"generation": generation})

        return Handler
