use std::fmt;

use super::wire::Offer;
use super::TransferError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionState {
    Offered,
    Accepted,
    Rejected,
    Streaming,
    Complete,
    Failed,
}

impl SessionState {
    pub fn can_advance_to(self, next: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, next),
            (Offered, Accepted)
                | (Offered, Rejected)
                | (Accepted, Streaming)
                | (Accepted, Failed)
                | (Streaming, Complete)
                | (Streaming, Failed)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            SessionState::Rejected | SessionState::Complete | SessionState::Failed
        )
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One offer/accept/stream exchange, as seen by either peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferSession {
    pub offer: Offer,
    state: SessionState,
    pub data_port: Option<u16>,
    pub bytes_moved: u64,
    /// Why the session ended in `Failed`.
    pub failure: Option<String>,
}

impl TransferSession {
    pub fn new(offer: Offer) -> Self {
        TransferSession {
            offer,
            state: SessionState::Offered,
            data_port: None,
            bytes_moved: 0,
            failure: None,
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn advance(&mut self, next: SessionState) -> Result<(), TransferError> {
        if !self.state.can_advance_to(next) {
            return Err(TransferError::IllegalTransition {
                from: self.state,
                to: next,
            });
        }
        self.state = next;
        Ok(())
    }

    pub(crate) fn fail(&mut self, why: impl Into<String>) {
        if self.state.can_advance_to(SessionState::Failed) {
            self.state = SessionState::Failed;
        }
        self.failure = Some(why.into());
    }
}
