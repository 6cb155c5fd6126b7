//! Exit codes: 0 ok, 2 bad input data, 64 usage, 70 internal.

use std::fmt::Display;

pub const DATA: u8 = 2;
pub const USAGE: u8 = 64;
pub const INTERNAL: u8 = 70;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn failure<E: Into<anyhow::Error>>(code: u8) -> impl FnOnce(E) -> Failure {
    move |e| Failure { code, error: e.into() }
}

pub fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    failure(DATA)(e)
}

pub fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    failure(USAGE)(e)
}

pub fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    failure(INTERNAL)(e)
}

pub fn data_msg(msg: impl Display) -> Failure {
    data(anyhow::anyhow!("{msg}"))
}

pub fn usage_msg(msg: impl Display) -> Failure {
    usage(anyhow::anyhow!("{msg}"))
}
