fn main() {
    std::process::exit(doppler_ccm::cli::run(std::env::args_os()));
}
