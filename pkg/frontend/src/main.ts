import { App } from './app.js';
import { NelsApi } from './api.js';

document.addEventListener('DOMContentLoaded', () => {
  const app = new App(
    {
      results: document.getElementById('results')!,
      classify: document.getElementById('classify-panel')!,
      stats: document.getElementById('stats-panel')!,
    },
    new NelsApi(),
  );

  const searchForm = document.getElementById('search-form') as HTMLFormElement;
  const searchInput = document.getElementById('search-input') as HTMLInputElement;
  searchForm.addEventListener('submit', (event) => {
    event.preventDefault();
    app.lastAction = app.runSearch(searchInput.value);
  });

  const classifyForm = document.getElementById('classify-form') as HTMLFormElement;
  const classifyInput = document.getElementById('classify-input') as HTMLInputElement;
  classifyForm.addEventListener('submit', (event) => {
    event.preventDefault();
    app.lastAction = app.runClassify(classifyInput.value);
  });

  app.lastAction = app.refreshStats();
});
