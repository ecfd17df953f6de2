from jointdp.cli import main

main()
