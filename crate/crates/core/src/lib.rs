//! Knowledge compilation modulo theories.
//!
//! Quantifier-free formulas over Boolean and linear real arithmetic atoms are
//! compiled into T-reduced or T-extended decision-DNNF / OBDD circuits by
//! conjoining (or disjoining) theory lemmas enumerated up front. The compiled
//! circuits then answer consistency, validity, entailment, implicant,
//! counting, enumeration, equivalence and sentential-entailment queries
//! modulo the theory using purely propositional traversals.
//!
//! ```
//! use dnnfmt::query::{count_models, enumerate_models};
//! use dnnfmt::{build_tred, parse_smt2, FormulaStore};
//!
//! let mut store = FormulaStore::new();
//! let (phi, alpha) = parse_smt2(&mut store, "(declare-fun x () Real)\n(assert (or (<= x 0) (= x 1)))")?;
//! let a = build_tred(&mut store, phi, &alpha)?;
//! assert_eq!(count_models(&a)?, 2u32.into());
//! let models: Vec<String> = enumerate_models(&a)?.map(|m| m.display_with(&a.map)).collect();
//! assert_eq!(models, ["(<= x 0) & !(= x 1)", "!(<= x 0) & (= x 1)"]);
//! # Ok::<(), dnnfmt::Error>(())
//! ```

pub mod artifact;
pub mod atom;
pub mod bench;
pub mod ddnnf;
pub mod error;
pub mod formula;
pub mod generate;
pub mod lemma;
pub mod lit;
pub mod nnf_io;
pub mod obdd;
pub mod oracle;
pub mod query;
pub mod smt2;
pub mod theory;

pub use artifact::{build, build_obdd_artifact, build_text, build_tred, BuildOptions, CompiledArtifact, Mode, Root, Target};
pub use atom::{AbstractionMap, Assignment, Atom, AtomSet, Cmp, LinearAtom, Rational, Relation};
pub use ddnnf::{Ddnnf, DdnnfNode, NodeId};
pub use error::{Error, Result};
pub use formula::{AtomId, Dag, Expr, FormulaId, FormulaStore, Node, PropFormula};
pub use generate::{generate, InstanceSpec, OperatorMix};
pub use lemma::{enumerate_lemmas, EnumOptions, LemmaScope, LemmaSet, LemmaTarget, TLemma};
pub use lit::{Lit, Var};
pub use nnf_io::{load_artifact, read_artifact, save_artifact, write_artifact, MapFile};
pub use obdd::{BddId, BddNode, BddOp, Obdd, ObddManager, SharedManager};
pub use oracle::{AssignmentSets, Oracle};
pub use smt2::{parse_atom, parse_smt2, print_smt2};
pub use theory::{minimize_conflict, Backend, ConflictCore, TheorySolver, TheoryVerdict};
