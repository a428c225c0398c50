use std::fmt;

use crate::typesys::{TypeHierarchy, TypeId};

/// A reentrancy tag, written `#n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(pub u32);

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Linear representation of a typed feature structure.
///
/// Arguments are positional: the `i`-th argument of a node of type `t` is
/// the value of the `i`-th feature of `t` in alphabetical order. In a normal
/// term each tag has exactly one contentful occurrence (`Full` or `General`)
/// and that occurrence comes first; every other occurrence is `Back`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Full {
        tag: Option<Tag>,
        ty: TypeId,
        args: Vec<Term>,
    },
    /// The most general structure of `ty`, left unexpanded. Written as a bare
    /// type name when the type has features.
    General {
        tag: Option<Tag>,
        ty: TypeId,
    },
    Back(Tag),
}

impl Term {
    pub fn atom(ty: TypeId) -> Term {
        Term::Full {
            tag: None,
            ty,
            args: Vec::new(),
        }
    }

    pub fn tag(&self) -> Option<Tag> {
        match self {
            Term::Full { tag, .. } | Term::General { tag, .. } => *tag,
            Term::Back(t) => Some(*t),
        }
    }

    /// Type of a contentful node; `None` for back-references.
    pub fn ty(&self) -> Option<TypeId> {
        match self {
            Term::Full { ty, .. } | Term::General { ty, .. } => Some(*ty),
            Term::Back(_) => None,
        }
    }

    /// Number of contentful nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Term::Full { args, .. } => 1 + args.iter().map(Term::node_count).sum::<usize>(),
            Term::General { .. } => 1,
            Term::Back(_) => 0,
        }
    }

    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> TermDisplay<'a> {
        TermDisplay { term: self, h }
    }
}

/// An ordered, non-empty list of terms sharing one tag scope. When `headed`
/// is set the last root is the head and the others form the body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mrs {
    pub roots: Vec<Term>,
    pub headed: bool,
}

impl Mrs {
    pub fn head(&self) -> Option<&Term> {
        if self.headed {
            self.roots.last()
        } else {
            None
        }
    }

    pub fn body(&self) -> &[Term] {
        if self.headed {
            &self.roots[..self.roots.len() - 1]
        } else {
            &self.roots
        }
    }

    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> MrsDisplay<'a> {
        MrsDisplay { mrs: self, h }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    h: &'a TypeHierarchy,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.h)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, h: &TypeHierarchy) -> fmt::Result {
    match t {
        Term::Back(tag) => write!(f, "{tag}"),
        Term::General { tag, ty } => {
            if let Some(tag) = tag {
                write!(f, "{tag} ")?;
            }
            f.write_str(h.type_name(*ty))
        }
        Term::Full { tag, ty, args } => {
            if let Some(tag) = tag {
                write!(f, "{tag} ")?;
            }
            f.write_str(h.type_name(*ty))?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_term(f, a, h)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

pub struct MrsDisplay<'a> {
    mrs: &'a Mrs,
    h: &'a TypeHierarchy,
}

impl fmt::Display for MrsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.mrs.roots.len();
        for (i, root) in self.mrs.roots.iter().enumerate() {
            if i > 0 {
                if self.mrs.headed && i == n - 1 {
                    f.write_str(" => ")?;
                } else {
                    f.write_str(", ")?;
                }
            }
            write_term(f, root, self.h)?;
        }
        Ok(())
    }
}
