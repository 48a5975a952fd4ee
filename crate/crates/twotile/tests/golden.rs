mod common;

use twotile::fixtures::rule_fixture;
use twotile::SubdivisionRule;

#[test]
fn checked_in_artifacts_match() {
    let stale = common::stale_artifacts(&common::artifacts());
    assert!(stale.is_empty(), "stale artifacts (rerun with {}=1): {stale:?}", common::BLESS_VAR);
}

#[test]
fn artifacts_are_deterministic() {
    assert_eq!(common::artifacts(), common::artifacts());
}

#[test]
fn rule_files_parse_back_to_the_fixtures() {
    for name in ["lattes2x2", "grid:2:3", "grid:5:5", "barycentric", "z2m1"] {
        let path = common::data_dir().join(format!("{}.rule", common::file_stem(name)));
        let text = std::fs::read_to_string(&path).expect("rule file");
        let parsed = SubdivisionRule::parse(&text).expect("parses");
        assert_eq!(parsed.to_text(), rule_fixture(name).expect("fixture").to_text());
    }
}
