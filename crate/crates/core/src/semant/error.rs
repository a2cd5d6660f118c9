use crate::frontend::Span;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemantError {
    #[error("{span}: UnboundNameError: `{name}` is not defined")]
    UnboundName { name: String, span: Span },
    #[error("{span}: NonlocalWithoutBindingError: no enclosing function binds `{name}`")]
    NonlocalWithoutBinding { name: String, span: Span },
    #[error("{span}: RedeclarationKindError: `{name}` is a {first} and cannot also hold a {second}")]
    RedeclarationKind { name: String, span: Span, first: String, second: String },
    #[error("{span}: KindConflictError: `{name}` holds {existing} and cannot also hold {incoming}")]
    KindConflict { name: String, span: Span, existing: String, incoming: String },
    #[error("{span}: AmbiguousKindError: kind of `{name}` cannot be determined (never assigned or function never called)")]
    AmbiguousKind { name: String, span: Span },
    #[error("{span}: NestedDynamicError: nested function `{name}` cannot be marked @dynamic")]
    NestedDynamic { name: String, span: Span },
    #[error("{span}: NonTopLevelDynamicError: only top-level functions can be marked @dynamic (`{name}`)")]
    NonTopLevelDynamic { name: String, span: Span },
    #[error("{span}: UnknownFunctionError: load_function target `{name}` is not a top-level function")]
    UnknownFunction { name: String, span: Span },
    #[error("{span}: DeleteNonProcError: `{name}` does not hold a function")]
    DeleteNonProc { name: String, span: Span },
    #[error("{span}: ArityError: `{name}` takes {expected} argument(s), {found} given")]
    Arity { name: String, expected: usize, found: usize, span: Span },
    #[error("{span}: TypeError: {message}")]
    Type { message: String, span: Span },
    #[error("{span}: UnsupportedFeatureError: {message}")]
    Unsupported { message: String, span: Span },
}

impl SemantError {
    pub(crate) fn ty(span: Span, message: impl Into<String>) -> Self {
        SemantError::Type { message: message.into(), span }
    }

    pub(crate) fn unsupported(span: Span, message: impl Into<String>) -> Self {
        SemantError::Unsupported { message: message.into(), span }
    }
}
