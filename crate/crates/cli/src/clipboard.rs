use std::io::Write;
use std::process::{Command, Stdio};

const TOOLS: [(&str, &[&str]); 3] = [
    ("wl-copy", &[]),
    ("xclip", &["-selection", "clipboard"]),
    ("pbcopy", &[]),
];

/// Copies `text` with the first clipboard tool that works. Returns its name.
pub fn copy(text: &str) -> Option<&'static str> {
    TOOLS.iter().find_map(|(tool, args)| {
        let mut child = Command::new(tool)
            .args(*args)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .ok()?;
        let wrote = child.stdin.take()?.write_all(text.as_bytes()).is_ok();
        let ok = child.wait().map(|s| s.success()).unwrap_or(false);
        (wrote && ok).then_some(*tool)
    })
}
