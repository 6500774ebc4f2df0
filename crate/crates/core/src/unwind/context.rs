//! The unwinding context: constants `N`, scope maps `V` and side
//! conditions `E`.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

use crate::smt::term::{Sort, Term};

/// `base@version@writecount`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SsaName {
    pub base: String,
    pub version: u32,
    pub writecount: u32,
}

impl fmt::Display for SsaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}@{}", self.base, self.version, self.writecount)
    }
}

#[derive(Clone, Debug)]
pub struct Binding {
    pub name: SsaName,
    pub sort: Sort,
    /// Literal value of the constant, when known and propagation is on.
    pub known: Option<Term>,
}

impl Binding {
    pub fn term(&self) -> Term {
        Term::constant(self.name.to_string(), self.sort.clone())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub vars: IndexMap<String, Binding>,
    /// Function frame: lookups do not continue past it except into the
    /// global scope.
    pub barrier: bool,
}

#[derive(Clone, Debug)]
pub struct Context {
    /// Declared constants in creation order.
    pub n: IndexMap<String, Sort>,
    pub v: Vec<Scope>,
    pub e: Vec<Term>,
    versions: HashMap<String, u32>,
    /// Lowest writecount the next update of a variable may use; only the
    /// guarded branch encoding raises it.
    floors: HashMap<(String, u32), u32>,
}

impl Default for Context {
    fn default() -> Self {
        Context::new()
    }
}

impl Context {
    /// One empty global scope.
    pub fn new() -> Self {
        Context {
            n: IndexMap::new(),
            v: vec![Scope::default()],
            e: Vec::new(),
            versions: HashMap::new(),
            floors: HashMap::new(),
        }
    }

    /// Index of the scope holding the visible binding of `jv`.
    fn scope_of(&self, jv: &str) -> Option<usize> {
        for i in (0..self.v.len()).rev() {
            if self.v[i].vars.contains_key(jv) {
                return Some(i);
            }
            if self.v[i].barrier {
                return self.v[0].vars.contains_key(jv).then_some(0);
            }
        }
        None
    }

    pub fn lookup(&self, jv: &str) -> Option<&Binding> {
        self.scope_of(jv).map(|i| &self.v[i].vars[jv])
    }

    pub fn lookup_mut(&mut self, jv: &str) -> Option<&mut Binding> {
        let i = self.scope_of(jv)?;
        self.v[i].vars.get_mut(jv)
    }

    /// Add a constant to `N`. Names may repeat across mutually exclusive
    /// branches, so re-registering with the same sort is allowed.
    fn register(&mut self, name: &SsaName, sort: &Sort) {
        let text = name.to_string();
        if let Some(old) = self.n.insert(text.clone(), sort.clone()) {
            assert_eq!(&old, sort, "constant {text} re-declared with another sort");
        }
    }

    /// A fresh constant `base@v@0` with a new version, not bound to any
    /// variable.
    pub fn fresh(&mut self, base: &str, sort: Sort) -> Binding {
        let v = self.versions.entry(base.to_string()).or_insert(0);
        let name = SsaName {
            base: base.to_string(),
            version: *v,
            writecount: 0,
        };
        *v += 1;
        self.register(&name, &sort);
        Binding {
            name,
            sort,
            known: None,
        }
    }

    /// Bind `jv` to a fresh version in the innermost scope.
    pub fn declare(&mut self, jv: &str, sort: Sort) -> Term {
        let b = self.fresh(jv, sort);
        let t = b.term();
        self.v.last_mut().expect("a scope").vars.insert(jv.to_string(), b);
        t
    }

    /// Rebind `jv` to its next writecount in the scope that declares it;
    /// an unbound variable is declared in the innermost scope.
    pub fn update(&mut self, jv: &str) -> Term {
        let Some(i) = self.scope_of(jv) else {
            panic!("update of undeclared variable {jv}");
        };
        let old = &self.v[i].vars[jv];
        let key = (old.name.base.clone(), old.name.version);
        let wc = (old.name.writecount + 1).max(self.floors.get(&key).copied().unwrap_or(0));
        let name = SsaName {
            writecount: wc,
            ..old.name.clone()
        };
        let sort = old.sort.clone();
        self.register(&name, &sort);
        let b = Binding {
            name,
            sort,
            known: None,
        };
        let t = b.term();
        self.v[i].vars.insert(jv.to_string(), b);
        t
    }

    /// Like [`Context::update`] but declares unbound variables.
    pub fn update_or_declare(&mut self, jv: &str, sort: Sort) -> Term {
        if self.scope_of(jv).is_some() {
            self.update(jv)
        } else {
            self.declare(jv, sort)
        }
    }

    /// Bind `jv` to an already registered name in its declaring scope.
    pub fn rebind(&mut self, jv: &str, name: SsaName, known: Option<Term>) {
        let b = self.lookup_mut(jv).expect("rebinding a bound variable");
        b.name = name;
        b.known = known;
    }

    /// Register a constant created outside the scope discipline (used by
    /// branch merging).
    pub fn ensure(&mut self, name: &SsaName, sort: &Sort) {
        self.register(name, sort);
    }

    pub fn raise_floor(&mut self, name: &SsaName, wc: u32) {
        let f = self
            .floors
            .entry((name.base.clone(), name.version))
            .or_insert(0);
        *f = (*f).max(wc);
    }

    pub fn enter(&mut self) {
        self.v.push(Scope::default());
    }

    pub fn enter_frame(&mut self) {
        self.v.push(Scope {
            vars: IndexMap::new(),
            barrier: true,
        });
    }

    pub fn leave(&mut self) {
        assert!(self.v.len() > 1, "leaving the global scope");
        self.v.pop();
    }

    pub fn add_constraint(&mut self, f: Term) {
        if f.as_bool() != Some(true) {
            self.e.push(f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv() -> Sort {
        Sort::BitVec(32)
    }

    fn name(ctx: &Context, jv: &str) -> String {
        ctx.lookup(jv).unwrap().name.to_string()
    }

    #[test]
    fn lookup_scans_innermost_first() {
        let mut ctx = Context::new();
        ctx.declare("x", bv());
        assert_eq!(name(&ctx, "x"), "x@0@0");
        ctx.enter();
        assert_eq!(name(&ctx, "x"), "x@0@0");
        ctx.declare("x", bv());
        assert_eq!(name(&ctx, "x"), "x@1@0");
        ctx.leave();
        assert_eq!(name(&ctx, "x"), "x@0@0");
    }

    #[test]
    fn updates_bump_the_writecount() {
        let mut ctx = Context::new();
        ctx.update_or_declare("x", bv());
        assert_eq!(ctx.n.len(), 1);
        ctx.update("x");
        assert_eq!(name(&ctx, "x"), "x@0@1");
        ctx.enter();
        ctx.update("x");
        ctx.leave();
        // the write inside the block rebinds the declaring scope
        assert_eq!(name(&ctx, "x"), "x@0@2");
        assert_eq!(ctx.n.keys().collect::<Vec<_>>(), ["x@0@0", "x@0@1", "x@0@2"]);
    }

    #[test]
    fn frames_hide_caller_locals() {
        let mut ctx = Context::new();
        ctx.declare("g", bv());
        ctx.enter();
        ctx.declare("local", bv());
        ctx.enter_frame();
        assert!(ctx.lookup("local").is_none());
        assert!(ctx.lookup("g").is_some());
        ctx.leave();
        assert!(ctx.lookup("local").is_some());
    }

    #[test]
    fn constraints_skip_true() {
        let mut ctx = Context::new();
        ctx.add_constraint(Term::bool(true));
        ctx.add_constraint(Term::bool(false));
        assert_eq!(ctx.e, vec![Term::bool(false)]);
    }
}
