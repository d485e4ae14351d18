pub mod error;
pub mod vocabulary;
pub mod suggesters;
pub mod recommender;
pub mod analytics;
pub mod combined;
