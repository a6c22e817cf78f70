from stopgo.cli import main

main()
