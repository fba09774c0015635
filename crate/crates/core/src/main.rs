use volsample::cli;

fn main() {
    std::process::exit(cli::run());
}
