from exg.cli import main

main()
