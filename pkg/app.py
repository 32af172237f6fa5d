"""Console entry: ``python app.py <command> <config.json>`` or the installed ``grushinlab`` script."""
from core.cli.glcli import main

if __name__ == "__main__":
    main()
