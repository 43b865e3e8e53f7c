use entropy_cli::scenario::{parse_scenario, ParseError};

fn error(text: &str) -> ParseError {
    parse_scenario(text).expect_err("scenario should not parse")
}

const BASE: &str = "[system x]\nkind = sft\nmatrix = 1 1 / 1 1\n";

#[test]
fn undefined_cover_is_reported_at_its_line() {
    let e = error(&format!("{BASE}\n[compactification z]\ncover = missing\nhost = x\nembedding = identity\n"));
    assert_eq!(e.line, 6);
    assert!(e.reason.contains("unresolved reference"), "{e}");
}

#[test]
fn duplicate_ids() {
    let e = error(&format!("{BASE}{BASE}"));
    assert_eq!(e.line, 4);
    assert!(e.reason.contains("duplicate"), "{e}");
    // the same id in different kinds is fine
    parse_scenario(&format!("{BASE}[task x]\nop = entropy\nsystem = x\n")).unwrap();
}

#[test]
fn malformed_matrix() {
    let e = error("[system x]\nkind = sft\nmatrix = 1 1 / 1\n");
    assert_eq!(e.line, 3);
    assert!(e.reason.contains("malformed matrix"), "{e}");
    let e = error("[monomial m]\nmatrix = 1 2 / 2 4\n");
    assert_eq!(e.line, 2);
    assert!(e.reason.contains("singular"), "{e}");
}

#[test]
fn unknown_keys_and_stray_lines() {
    let e = error(&format!("{BASE}colour = red\n"));
    assert_eq!((e.line, e.reason.contains("unknown key `colour`")), (4, true), "{e}");
    assert_eq!(error("kind = sft\n").line, 1);
    assert_eq!(error(&format!("{BASE}just words\n")).line, 4);
    assert_eq!(error("[system]\n").line, 1);
    assert_eq!(error("[widget w]\n").line, 1);
    assert_eq!(error(&format!("{BASE}kind = sft\n")).line, 4);
}

#[test]
fn missing_keys_point_at_the_header() {
    let e = error("# comment\n\n[task t]\nop = h_omega\n");
    assert_eq!(e.line, 3);
    assert!(e.reason.contains("missing `system`"), "{e}");
}

#[test]
fn objects_are_validated() {
    // golden mean has no 2-block 1.1, so this code is not total
    let text = "[system g]\nkind = sft\nmatrix = 1 1 / 1 0\n[cover c]\nsource = g\ntarget = g\nkind = block_code\nlabels = 0 5\n";
    assert_eq!(error(text).line, 4);
    let text = "[system n]\nkind = affine\ndomain = naturals\na = -1\nb = 0\n";
    assert_eq!(error(text).line, 1);
    let text = "[system b]\nkind = higher_block\nbase = later\nlength = 2\n[system later]\nkind = sft\nmatrix = 1\n";
    assert_eq!(error(text).line, 3);
    let text = "[system f]\nkind = finite\npoints = 2\nopens = {} {0}\nmap = 0 1\n";
    assert!(error(text).reason.contains("whole space"));
}

#[test]
fn values_parse() {
    let text = "[system m]\nkind = metric\nmap = circle_doubling\nepsilon = 2^-8\n\
                [task t]\nop = h_cr\nsystem = m\ncandidates = whole; interval 1/4 3/4\nauto = false\n";
    let sc = parse_scenario(text).unwrap();
    assert!(sc.to_string().contains("epsilon = 0.00390625"));
    assert!(sc.to_string().contains("candidates = whole; interval 1/4 3/4"));
    assert_eq!(error("[task t]\nop = suite\ntrials = 0\n").line, 3);
    assert_eq!(error("[task t]\nop = h_cr\nsystem = q\nauto = maybe\n").line, 4);
}
