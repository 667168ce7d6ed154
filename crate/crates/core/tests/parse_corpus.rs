use std::fs;
use std::path::PathBuf;

use kaisar::parser::parse_document;
use kaisar::printer;

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kaisar"))
        .collect();
    files.sort();
    files
}

#[test]
fn every_corpus_file_parses() {
    for f in corpus() {
        let src = fs::read_to_string(&f).unwrap();
        if let Err(d) = parse_document(&src) {
            panic!("{}", d.render(&f.display().to_string(), &src));
        }
    }
}

#[test]
fn print_then_parse_is_a_fixpoint() {
    for f in corpus() {
        let src = fs::read_to_string(&f).unwrap();
        let doc = parse_document(&src).unwrap();
        let text = printer::document(&doc);
        let again = parse_document(&text).unwrap_or_else(|d| panic!("{}\n{}", d.render("printed", &text), text));
        assert_eq!(doc, again, "{}:\n{}", f.display(), text);
    }
}
