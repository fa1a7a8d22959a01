from mm.ui.cli import launch_app
if __name__ == "__main__":
    raise SystemExit(launch_app())
