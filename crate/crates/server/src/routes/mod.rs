pub mod attachments;
pub mod fragments;
pub mod glossary;
pub mod labkit;
pub mod labworks;
pub mod principals;
pub mod render;
pub mod resources;
pub mod session;
pub mod taxonomy;
