use super::*;
use crate::elab::elaborate;
use crate::parser::parse_document;

fn run(src: &str) -> Checked {
    let doc = parse_document(src).expect("parses");
    let el = elaborate(&doc).expect("elaborates");
    check(&el, &Config::default())
}

#[test]
#[ignore]
fn show() {
    let path = std::env::var("SHOW").expect("SHOW=path");
    let src = std::fs::read_to_string(path).unwrap();
    let c = run(&src);
    for o in &c.obligations {
        println!("{}", o.summary());
    }
    for d in &c.diagnostics {
        println!("{}", d.render("input", &src));
    }
    for (_, p) in &c.prints {
        println!("print: {}", p);
    }
}
