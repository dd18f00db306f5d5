//! Scoped-label resolution.
//!
//! A label path like `l3:l1:s1` names a statement by the chain of labels on
//! its enclosing labeled statements (loops, name nodes) plus its own label.
//! Resolution recomputes scopes by walking the IR, so paths keep working
//! after program transforms replace loops with name nodes.

use crate::ast::{LStmt, ProgramIR, StmtId};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("label `{0}` not found")]
    NotFound(String),
    #[error("label `{0}` is ambiguous")]
    Ambiguous(String),
}

/// Resolve a fully-qualified label path to the id of the unique statement it
/// names.
pub fn resolve_label(ir: &ProgramIR, path: &str) -> Result<StmtId, LabelError> {
    let want: Vec<&str> = path.split(':').collect();
    let mut hits = Vec::new();
    ir.visit_main(&mut |scope, stmt| {
        if let Some(label) = &stmt.label {
            if want.len() == scope.len() + 1
                && want[..scope.len()] == scope[..]
                && want[scope.len()] == label
            {
                hits.push(stmt.id);
            }
        }
    });
    match hits.len() {
        0 => Err(LabelError::NotFound(path.to_string())),
        1 => Ok(hits[0]),
        _ => Err(LabelError::Ambiguous(path.to_string())),
    }
}

/// Full scoped path of a statement, if it is labeled.
pub fn path_of(ir: &ProgramIR, id: StmtId) -> Option<String> {
    let mut found = None;
    ir.visit_main(&mut |scope, stmt| {
        if stmt.id == id {
            if let Some(label) = &stmt.label {
                let mut parts: Vec<&str> = scope.to_vec();
                parts.push(label);
                found = Some(parts.join(":"));
            }
        }
    });
    found
}

/// Find a statement by id anywhere in `main`.
pub fn find_stmt<'a>(ir: &'a ProgramIR, id: StmtId) -> Option<&'a LStmt> {
    let mut found: Option<&LStmt> = None;
    ir.visit_main(&mut |_, stmt| {
        if stmt.id == id {
            found = Some(stmt);
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    #[test]
    fn plain_label_resolves_through_unlabeled_scopes() {
        let ir = parse_program(PRDELTA).unwrap();
        // s1 sits inside an unlabeled for loop, so its full path is just s1.
        let id = resolve_label(&ir, "s1").unwrap();
        assert_eq!(path_of(&ir, id).as_deref(), Some("s1"));
    }

    #[test]
    fn missing_label() {
        let ir = parse_program(PRDELTA).unwrap();
        assert_eq!(resolve_label(&ir, "l9:s1"), Err(LabelError::NotFound("l9:s1".into())));
    }

    #[test]
    fn scoped_labels_disambiguate_duplicates() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f1(src : Vertex, dst : Vertex) end
func f2(src : Vertex, dst : Vertex) end
func main()
    #l1# for i in 1:10
        #s1# edges.apply(f1);
    end
    #l2# for i in 1:10
        #s1# edges.apply(f2);
    end
end
"#;
        let ir = parse_program(src).unwrap();
        let a = resolve_label(&ir, "l1:s1").unwrap();
        let b = resolve_label(&ir, "l2:s1").unwrap();
        assert_ne!(a, b);
        // The bare suffix alone matches neither (it is not a full path).
        assert!(matches!(resolve_label(&ir, "s1"), Err(LabelError::NotFound(_))));
    }
}
