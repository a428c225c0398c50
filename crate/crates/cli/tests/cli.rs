use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const EXAMPLE: &str = include_str!("../../core/fixtures/example.types");
const TOY: &str = include_str!("../../core/fixtures/toy.grammar");
const AMBIGUOUS: &str = include_str!("../../core/fixtures/ambiguous.grammar");

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn tfsam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfsam"))
        .args(args)
        .output()
        .unwrap()
}

fn run(text: &str, args: &[&str]) -> (i32, String, String) {
    let f = file(text);
    let path = f.path().to_str().unwrap().to_string();
    let mut all = vec![args[0], path.as_str()];
    all.extend_from_slice(&args[1..]);
    let out = tfsam(&all);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn check_reports_valid_hierarchy() {
    let (code, out, _) = run(EXAMPLE, &["check"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("9 types, valid\n"), "{out}");
}

#[test]
fn check_rejects_invalid_hierarchy() {
    let (code, _, err) = run("bot sub [a]. a sub []. a sub [].", &["check"]);
    assert_eq!(code, 1);
    assert!(err.contains("characterized"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let out = tfsam(&["check", "/definitely/not/here.types"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_lists_query_and_program() {
    let (code, out, _) = run(
        EXAMPLE,
        &[
            "compile",
            "--query",
            "b(b(#1 d,#1),d)",
            "--program",
            "a(#3 d1,#3)",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "query:\nput_node b/2,X1\nput_node b/2,X2\nput_node d/0,X4\nput_node d/0,X3\n\
         put_arc X1,1,X2\nput_arc X1,2,X3\nput_arc X2,1,X4\nput_arc X2,2,X4\n\
         program:\nget_structure a/2,X1\nunify_variable X2\nunify_value X2\nget_structure d1/0,X2\n"
    );
}

#[test]
fn compile_grammar() {
    let (code, out, _) = run(TOY, &["compile"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("rho: 16 instructions\n"), "{out}");
    let (_, out, _) = run(TOY, &["compile", "--disasm"]);
    assert!(
        out.starts_with("rho:\nstart_rule 2\nget_structure a/2,X1\n"),
        "{out}"
    );
    assert!(out.contains("lex w2:\nput_node d/0,X1\n"), "{out}");
    // a hierarchy alone compiles to nothing
    let (code, out, _) = run(EXAMPLE, &["compile", "--disasm"]);
    assert_eq!((code, out.as_str()), (0, ""));
}

#[test]
fn unify_prints_result_or_fail() {
    let (code, out, _) = run(EXAMPLE, &["unify", "b(b(#1 d,#1),d)", "a(#3 d1,#3)"]);
    assert_eq!(code, 0);
    assert_eq!(out, "c(#1 d1,b(#2 d,#2),#1,bot)\n");
    let (code, out, _) = run(EXAMPLE, &["unify", "d1", "d2"]);
    assert_eq!((code, out.as_str()), (0, "FAIL\n"));
    let (_, out, _) = run(EXAMPLE, &["unify", "a(#1 d,#1)", "a(#1 d,#1)"]);
    assert_eq!(out, "a(#1 d,#1)\n");
}

#[test]
fn unify_dumps_heap() {
    let (_, out, _) = run(EXAMPLE, &["unify", "--dump-heap", "b(b(#1 d,#1),d)", "d"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "FAIL");
    assert_eq!(
        &lines[1..],
        [
            "1: STR b", "2: REF 4", "3: REF 8", "4: STR b", "5: REF 7", "6: REF 7", "7: STR d",
            "8: STR d"
        ]
    );
}

#[test]
fn unify_rejects_ill_typed_terms() {
    let (code, _, err) = run(EXAMPLE, &["unify", "a(d,bot)", "a"]);
    assert_eq!(code, 1);
    assert!(err.contains("not well-typed"), "{err}");
    let (code, _, _) = run(EXAMPLE, &["unify", "zz", "a"]);
    assert_eq!(code, 1);
}

#[test]
fn parse_toy_grammar() {
    let (code, out, _) = run(TOY, &["parse", "w1 w2"]);
    assert_eq!((code, out.as_str()), (0, "a(d2,d)\n"));
    let (code, out, _) = run(TOY, &["parse", "w2 w1"]);
    assert_eq!((code, out.as_str()), (0, "no parse\n"));
    let (_, out, _) = run(TOY, &["parse", "--chart", "--no-path-compression", "w1 w2"]);
    assert!(
        out.starts_with("(0,0) rho @ 0\n(0,1) lex w1: a(d2,d)\n"),
        "{out}"
    );
    assert!(out.ends_with("--\na(d2,d)\n"), "{out}");
}

#[test]
fn parse_ambiguous_grammar() {
    let (_, out, _) = run(AMBIGUOUS, &["parse", "w1 w2"]);
    assert_eq!(out, "a(d2,d)\na(d1,d)\n");
}

#[test]
fn parse_errors() {
    let (code, _, err) = run(TOY, &["parse", "w9"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown word `w9`"), "{err}");
    let (code, _, _) = run(TOY, &["parse", "--max-items", "2", "w1 w2"]);
    assert_eq!(code, 3);
    let (code, _, _) = run(TOY, &["parse", "--max-steps", "1", "w1 w2"]);
    assert_eq!(code, 3);
}
