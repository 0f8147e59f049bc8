fn main() {
    std::process::exit(htmia::cli::run(std::env::args_os()));
}
