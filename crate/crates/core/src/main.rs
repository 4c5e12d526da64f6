fn main() {
    std::process::exit(sbm_infer::cli::cli_main(std::env::args_os()));
}
