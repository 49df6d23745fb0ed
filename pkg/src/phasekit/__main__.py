from phasekit.cli import main

main()
