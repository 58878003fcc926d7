fn main() {
    match macroforge_cli::app::run(std::env::args_os()) {
        Ok(text) => print!("{text}"),
        Err((code, message)) => {
            if code == 0 {
                print!("{message}");
            } else {
                eprintln!("{}", message.trim_end());
            }
            std::process::exit(code);
        }
    }
}
