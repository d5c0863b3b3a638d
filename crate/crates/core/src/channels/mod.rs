//! Quantum channels, the Choi–Jamiolkowski transform, the G contraction and POVM post-selection.

mod choi;
mod gfunc;
mod kraus;
mod postselect;

pub use choi::{apply_via_choi, choi_of_channel, ChoiMatrix};
pub use gfunc::{g_functionality, g_functionality_n};
pub use kraus::{kraus_apply, KrausChannel};
pub use postselect::{
    post_select_eval, post_select_eval_capped, post_select_exact, post_select_successes, povm_pair, PostSelectExact,
    PostSelectRun, RETRY_CAP,
};
