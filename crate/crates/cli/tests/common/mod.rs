use std::path::{Path, PathBuf};
use std::sync::OnceLock;

pub fn mini_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/mini/pipeline.toml")
}

/// Output directory of one mini-corpus build shared by the tests of a
/// binary.
pub fn mini_build() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = apitask_kg::pipeline::PipelineConfig::load(&mini_config()).unwrap();
        cfg.file.output.dir = dir.path().display().to_string();
        cfg.file.output.snapshot = None;
        apitask_kg::pipeline::Pipeline::new(cfg).unwrap().run_all().unwrap();
        dir
    })
    .path()
}
