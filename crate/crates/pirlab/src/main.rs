fn main() {
    let args: Vec<String> = std::env::args().collect();
    let env_seed = std::env::var("PIRLAB_SEED").ok();
    let code = pirlab::cli::run(&args, env_seed, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
