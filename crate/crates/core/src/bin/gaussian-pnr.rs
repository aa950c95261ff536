fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GAUSSIAN_PNR_LOG")).init();
    std::process::exit(gaussian_pnr::cli::run(std::env::args_os()));
}
