fn main() {
    std::process::exit(mbal::cli::dispatch(std::env::args_os()));
}
