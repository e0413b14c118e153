use raforge_core::testing::persistence_check;

#[test]
fn five_hundred_workspaces_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    persistence_check::run(500, dir.path()).unwrap();
}

#[test]
fn interrupted_write_keeps_the_prior_file() {
    let dir = tempfile::tempdir().unwrap();
    persistence_check::interrupted_write(dir.path()).unwrap();
}
