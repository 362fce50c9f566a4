#!/usr/bin/env python3
"""Span-lookup QA server speaking the readward HTTP protocol.

Each question maps to candidate spans; /answer returns the first span found
verbatim in the passage, else "". /score is not served. Used to record the
bundled fixtures:

    python3 tools/qa_stub.py data/fixtures/pacman_official.spans.json 8765 &
    readward read --manual data/manuals/pacman_official.txt --game pacman \
        --source official --objects ghost,pellet \
        --provider http:http://127.0.0.1:8765 \
        --record data/fixtures/pacman_official.json --out context.json
"""

import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def make_handler(spans):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            if self.path != "/answer":
                self.send_error(404)
                return
            found = next((s for s in spans.get(body["question"], []) if s in body["passage"]), "")
            out = json.dumps({"answer": found}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(out)))
            self.end_headers()
            self.wfile.write(out)

        def log_message(self, *args):
            pass

    return Handler


def main():
    with open(sys.argv[1]) as f:
        spans = json.load(f)
    port = int(sys.argv[2]) if len(sys.argv) > 2 else 8765
    ThreadingHTTPServer(("127.0.0.1", port), make_handler(spans)).serve_forever()


if __name__ == "__main__":
    main()
