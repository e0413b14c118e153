use raforge_core::export::{export_orkg, ExportError, ExportProfile, Flavor, OrkgSchema};
use raforge_core::testing::{export_check, golden};

const RESERVED: &str = "paper:title,paper:doi,paper:publication_year,contribution:research_problem";

#[test]
fn bundled_schema_has_the_import_header() {
    assert_eq!(OrkgSchema::bundled().header().join(","), RESERVED);
}

#[test]
fn gpt_fixture_matches_frozen_golden() {
    golden::check_orkg().unwrap();
    let golden_text = golden::orkg_golden();
    let header = golden_text.lines().next().unwrap();
    let dims: Vec<String> = golden::gpt_comparison().dimensions().iter().map(|d| d.name.clone()).collect();
    assert_eq!(header, format!("{RESERVED},{}", dims.join(",")));
}

#[test]
fn one_record_per_paper_with_the_shared_problem() {
    let mut profile = ExportProfile::new(Flavor::OrkgImport);
    profile.metadata = golden::papers();
    let bytes = export_orkg(&golden::gpt_comparison(), &profile).unwrap();
    let records = export_check::reread(&bytes).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records[1..].iter().all(|r| r[3] == golden::GPT_PROBLEM));
}

#[test]
fn missing_title_is_reported_by_label() {
    let mut profile = ExportProfile::new(Flavor::OrkgImport);
    profile.metadata = golden::papers();
    profile.metadata.remove("GPT-2");
    assert_eq!(
        export_orkg(&golden::gpt_comparison(), &profile),
        Err(ExportError::MissingMetadata("GPT-2".into()))
    );
}
