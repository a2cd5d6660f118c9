use super::source::{Pos, Span};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("{pos}: TabSpaceMixError: tab in indentation (spaces only)")]
    TabSpaceMix { pos: Pos },
    #[error("{pos}: UnterminatedStringError: string literal not closed before end of line")]
    UnterminatedString { pos: Pos },
    #[error("{pos}: IndentationError: {message}")]
    Indentation { pos: Pos, message: String },
    #[error("{pos}: invalid character {ch:?}")]
    InvalidCharacter { pos: Pos, ch: char },
    #[error("{pos}: invalid literal: {message}")]
    InvalidLiteral { pos: Pos, message: String },
    #[error("{}: SyntaxError: expected {}, found {found}", span.start, expected.join(" or "))]
    Syntax { span: Span, expected: Vec<String>, found: String },
    #[error("{}: UnsupportedFeatureError: {feature}", span.start)]
    UnsupportedFeature { span: Span, feature: String },
}

impl FrontendError {
    pub fn pos(&self) -> Pos {
        match self {
            FrontendError::TabSpaceMix { pos }
            | FrontendError::UnterminatedString { pos }
            | FrontendError::Indentation { pos, .. }
            | FrontendError::InvalidCharacter { pos, .. }
            | FrontendError::InvalidLiteral { pos, .. } => *pos,
            FrontendError::Syntax { span, .. } | FrontendError::UnsupportedFeature { span, .. } => span.start,
        }
    }
}
