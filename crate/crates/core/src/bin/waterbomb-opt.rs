fn main() {
    std::process::exit(waterbomb_opt::scenario::cli_main());
}
