pub mod cox_oracle;
pub mod sim;
