pub mod dataset;
pub mod evaluate;
pub mod judge;
pub mod llm;
pub mod pipeline;
pub mod prompts;
pub mod taxonomy;
