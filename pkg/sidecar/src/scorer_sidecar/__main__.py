"""Run the sidecar: `scorer-sidecar [--config sidecar.json]`."""

import argparse

import uvicorn

from .app import create_app
from .config import SidecarConfig


def main() -> None:
    parser = argparse.ArgumentParser(description="QE/reference scoring sidecar")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args()

    config = SidecarConfig.from_file(args.config) if args.config else SidecarConfig()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
