# In this folder (/core) we can put all the core modules/services of our app
