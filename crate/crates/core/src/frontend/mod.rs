//! Tokenizer, parser and pretty-printer for MiniPy.

pub mod ast;
mod error;
mod lexer;
mod parser;
mod pretty;
mod shape;
mod source;

pub use ast::*;
pub use error::FrontendError;
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, GrammarProfile, MINIPY};
pub use pretty::{expr as pretty_expr, pretty_print};
pub use shape::{shape, span_violations};
pub use source::{Pos, SourceProgram, Span};

/// Tokenize and parse in one step.
pub fn parse_source(src: &SourceProgram) -> Result<Module, FrontendError> {
    parse(&tokenize(src)?)
}

/// Convenience wrapper for in-memory text.
pub fn parse_str(text: &str) -> Result<Module, FrontendError> {
    parse_source(&SourceProgram::new("<input>", text))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING6: &str = "from epython import dynamic\n\n@dynamic(defer=True)\ndef add(x,y):\n    return x+y\n\n@dynamic\ndef add_nums():\n    global add\n    add = load_function(\"add\")\n    print(add(3,4))\n    del(add)\n\nadd_nums()\n";

    #[test]
    fn deferred_and_dynamic_decorators() {
        let m = parse_str(LISTING6).unwrap();
        assert!(m.imports_dynamic);
        let defs: Vec<&FunctionDef> = m
            .body
            .iter()
            .filter_map(|s| match &s.kind {
                StmtKind::FunctionDef(f) => Some(f),
                _ => None,
            })
            .collect();
        assert_eq!(defs.len(), 2);
        assert!(defs[0].is_dynamic() && defs[0].is_deferred());
        assert!(defs[1].is_dynamic() && !defs[1].is_deferred());
    }

    #[test]
    fn truncated_assignment_error_position() {
        match parse_str("x =") {
            Err(FrontendError::Syntax { span, .. }) => assert_eq!(span.start, Pos::new(1, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_outside_profile() {
        for src in [
            "class A:\n    pass\n",
            "v = [x for x in range(3)]\n",
            "f = lambda x: x\n",
            "import os\n",
            "x = 1 if y else 2\n",
            "f(a=1)\n",
            "x = a < b < c\n",
            "x = True\n",
            "for x in v:\n    pass\n",
            "@other\ndef f():\n    pass\n",
            "x = 2 ** 3\n",
        ] {
            assert!(matches!(parse_str(src), Err(FrontendError::UnsupportedFeature { .. })), "{src}");
        }
    }

    #[test]
    fn round_trip_fixpoint() {
        let m = parse_str(LISTING6).unwrap();
        let once = pretty_print(&m);
        let again = parse_str(&once).unwrap();
        assert_eq!(shape(&m), shape(&again));
        assert_eq!(once, pretty_print(&again));
    }

    #[test]
    fn precedence_survives_printing() {
        let m = parse_str("x = (a - b) - (c - d) * -(e + 1)\ny = not (p and q) or r\n").unwrap();
        let text = pretty_print(&m);
        assert_eq!(text, "x = a - b - (c - d) * -(e + 1)\ny = not (p and q) or r\n");
        assert_eq!(shape(&parse_str(&text).unwrap()), shape(&m));
    }

    #[test]
    fn spans_nest() {
        let m = parse_str(LISTING6).unwrap();
        assert!(span_violations(&m).is_empty());
    }

    #[test]
    fn elif_chain_prints_as_elif() {
        let src = "if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n";
        let m = parse_str(src).unwrap();
        assert_eq!(pretty_print(&m), src);
    }
}
