use std::process::ExitCode;

fn main() -> ExitCode {
    let code = bilayer_gn::cli::run(
        std::env::args_os(),
        std::env::vars(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
