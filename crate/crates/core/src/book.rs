// The guide's listings run as doctests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/market-data.md")]
mod market_data {}
#[doc = include_str!("../../../book/src/environment.md")]
mod environment {}
#[doc = include_str!("../../../book/src/network.md")]
mod network {}
#[doc = include_str!("../../../book/src/agent.md")]
mod agent {}
#[doc = include_str!("../../../book/src/training.md")]
mod training {}
#[doc = include_str!("../../../book/src/evaluation.md")]
mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
