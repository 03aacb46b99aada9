//! Diagnostics reported by the parser and the well-formedness checker.

use std::fmt;

use serde::Serialize;

use crate::ast::Label;

/// A region of source text. Lines and columns are 1-based; the end is
/// exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable identifier of a class of violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagCode {
    Syntax,
    AtomicInSequential,
    MissingMains,
    UnexpectedMains,
    UnknownLocation,
    ReservedIdentifier,
    DuplicateProc,
    DuplicateParam,
    DuplicateLocation,
    ReservedName,
    RecursionCycle,
    UndefinedProc,
    ArityMismatch,
    SelectCall,
    NestedAtomic,
    NtidRange,
    UnknownMain,
    BadMemorySize,
    MainHasParams,
    EmptyProgram,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::Syntax => "syntax",
            DiagCode::AtomicInSequential => "atomic-in-sequential",
            DiagCode::MissingMains => "missing-mains",
            DiagCode::UnexpectedMains => "unexpected-mains",
            DiagCode::UnknownLocation => "unknown-location",
            DiagCode::ReservedIdentifier => "reserved-identifier",
            DiagCode::DuplicateProc => "duplicate-proc",
            DiagCode::DuplicateParam => "duplicate-param",
            DiagCode::DuplicateLocation => "duplicate-location",
            DiagCode::ReservedName => "reserved-name",
            DiagCode::RecursionCycle => "recursion-cycle",
            DiagCode::UndefinedProc => "undefined-proc",
            DiagCode::ArityMismatch => "arity-mismatch",
            DiagCode::SelectCall => "select-call",
            DiagCode::NestedAtomic => "nested-atomic",
            DiagCode::NtidRange => "ntid-range",
            DiagCode::UnknownMain => "unknown-main",
            DiagCode::BadMemorySize => "bad-memory-size",
            DiagCode::MainHasParams => "main-has-params",
            DiagCode::EmptyProgram => "empty-program",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where in the program a violation sits, before it is resolved to text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProgramPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
    #[serde(skip_serializing_if = "is_default_point")]
    pub at: ProgramPoint,
}

fn is_default_point(p: &ProgramPoint) -> bool {
    *p == ProgramPoint::default()
}

impl Diagnostic {
    pub fn error(code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span: None,
            at: ProgramPoint::default(),
        }
    }

    pub fn with_span(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn in_proc(mut self, proc: impl Into<String>) -> Self {
        self.at.proc = Some(proc.into());
        self
    }

    pub fn at_label(mut self, label: Label) -> Self {
        self.at.label = Some(label);
        self
    }

    pub fn at_location(mut self, loc: impl Into<String>) -> Self {
        self.at.location = Some(loc.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}
